#include "mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "ocular.hpp"

namespace typeclust {

std::string to_string(Variant v)
{
    switch (v) {
    case Variant::full: return "full";
    case Variant::no_residual: return "no_residual";
    case Variant::vae_only: return "vae_only";
    case Variant::lambda_only: return "lambda_only";
    case Variant::ocular: return "ocular";
    }
    return "unknown";
}

Variant parse_variant(const std::string& name)
{
    for (auto v : {Variant::full, Variant::no_residual, Variant::vae_only, Variant::lambda_only, Variant::ocular})
        if (to_string(v) == name)
            return v;
    throw ArgumentError("unknown variant '" + name + "' (expected full, no_residual, vae_only, lambda_only, ocular)");
}

namespace {

EncoderConfig encoder_config(const ModelConfig& c)
{
    return {c.editor.z_dim, c.K, c.canvas, c.encoder_channels1, c.encoder_channels2};
}

} // namespace

MixtureState::MixtureState(const ModelConfig& c)
    : cfg(c),
      templates(std::size_t(std::max(c.K, 0)), std::vector<double>(std::size_t(c.canvas) * c.canvas, 0.0)),
      pi_logits(std::size_t(std::max(c.K, 0)), 0.0),
      editor(c.editor),
      encoder(encoder_config(c))
{
    if (c.K < 1)
        throw ArgumentError("ModelConfig: K must be >= 1");
    if (c.canvas < 4)
        throw ArgumentError("ModelConfig: canvas must be >= 4");
    if (!(c.bandwidth > 0))
        throw ArgumentError("ModelConfig: bandwidth must be positive");
    if (!c.prior.valid())
        throw ArgumentError("ModelConfig: prior standard deviations must be positive");
}

MixtureState MixtureState::initialized(const ModelConfig& c, nn::Rng& rng)
{
    MixtureState s(c);
    s.editor = EditorParams::initialized(c.editor, rng);
    s.encoder = EncoderParams::initialized(encoder_config(c), rng);
    return s;
}

std::vector<double> MixtureState::log_mixing_weights() const
{
    double lse = log_sum_exp(pi_logits);
    std::vector<double> out(pi_logits.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = pi_logits[k] - lse;
    return out;
}

std::vector<double> MixtureState::mixing_weights() const
{
    auto lw = log_mixing_weights();
    for (double& v : lw)
        v = std::exp(v);
    return lw;
}

std::vector<double> MixtureState::template_probs(int k) const
{
    std::vector<double> p(templates[k].size());
    std::transform(templates[k].begin(), templates[k].end(), p.begin(), nn::sigmoid);
    return p;
}

bool MixtureState::uses_warp() const { return cfg.variant != Variant::vae_only && cfg.variant != Variant::ocular; }

bool MixtureState::uses_editor() const
{
    return cfg.variant == Variant::full || cfg.variant == Variant::no_residual || cfg.variant == Variant::vae_only;
}

bool MixtureState::encodes_residual() const { return cfg.variant == Variant::full; }

std::vector<std::span<double>> MixtureState::tensors()
{
    std::vector<std::span<double>> t;
    for (auto& tm : templates)
        t.emplace_back(tm);
    t.emplace_back(pi_logits);
    for (auto s : editor.tensors())
        t.push_back(s);
    for (auto s : encoder.tensors())
        t.push_back(s);
    return t;
}

std::vector<std::span<const double>> MixtureState::tensors() const
{
    std::vector<std::span<const double>> t;
    for (const auto& tm : templates)
        t.emplace_back(tm);
    t.emplace_back(pi_logits);
    for (auto s : editor.tensors())
        t.push_back(s);
    for (auto s : encoder.tensors())
        t.push_back(s);
    return t;
}

bool MixtureState::all_finite() const
{
    for (auto t : tensors())
        for (double v : t)
            if (!std::isfinite(v))
                return false;
    return true;
}

double log_sum_exp(std::span<const double> v)
{
    if (v.empty())
        return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m))
        return m;
    double s = 0;
    for (double x : v)
        s += std::exp(x - m);
    return m + std::log(s);
}

double bernoulli_loglik(std::span<const double> x, std::span<const double> t_hat)
{
    if (x.size() != t_hat.size())
        throw ArgumentError("bernoulli_loglik: image and probability map differ in size");
    double ll = 0;
    for (std::size_t p = 0; p < x.size(); ++p)
        ll += x[p] * std::log(t_hat[p]) + (1.0 - x[p]) * std::log1p(-t_hat[p]);
    return ll;
}

ComponentPass component_forward(std::span<const double> x, int k, const SpatialParams& lambda,
                                const MixtureState& state, std::span<const double> noise, const ElboOptions& opts)
{
    if (state.cfg.variant == Variant::ocular)
        throw ArgumentError("component_elbo: the ocular variant has no continuous-latent ELBO");
    if (k < 0 || k >= state.K())
        throw ArgumentError("component_elbo: component out of range");
    if (x.size() != state.pixel_count())
        throw ArgumentError("component_elbo: image does not match canvas");

    ComponentPass p;
    p.k = k;
    p.x.assign(x.begin(), x.end());
    p.lambda = lambda;
    p.kl_weight = opts.kl_weight;
    p.template_prob = state.template_probs(k);

    if (state.uses_warp()) {
        p.attention = build_attention(lambda, state.canvas(), state.cfg.bandwidth);
        p.t_tilde = apply_attention(*p.attention, p.template_prob);
        p.terms.lambda_prior = lambda_log_prior(lambda, state.cfg.prior);
    } else {
        p.t_tilde = p.template_prob;
    }

    p.editor_active = state.uses_editor() && opts.editor_enabled;
    if (p.editor_active) {
        if (noise.size() != std::size_t(state.cfg.editor.z_dim))
            throw ArgumentError("component_elbo: noise dimension does not match z_dim");
        std::vector<double> enc_in(x.begin(), x.end());
        if (state.encodes_residual())
            for (std::size_t i = 0; i < enc_in.size(); ++i)
                enc_in[i] -= p.t_tilde[i];
        p.posterior = encode_residual(enc_in, k, state.encoder, &p.encoder_cache);
        p.noise.assign(noise.begin(), noise.end());
        auto z = sample_latent(p.posterior, noise);
        p.t_hat = filter_apply(p.t_tilde, state.canvas(), z, state.editor, &p.editor_cache);
        p.terms.kl = kl_to_prior(p.posterior);
    } else {
        p.t_hat.resize(p.t_tilde.size());
        std::transform(p.t_tilde.begin(), p.t_tilde.end(), p.t_hat.begin(), clamp_prob);
    }

    p.terms.loglik = bernoulli_loglik(x, p.t_hat);
    p.terms.value = p.terms.loglik + p.terms.lambda_prior - opts.kl_weight * p.terms.kl;
    return p;
}

void component_backward(const ComponentPass& p, const MixtureState& state, double weight, MixtureState& grad,
                        SpatialParams* grad_lambda)
{
    const std::size_t npix = p.x.size();
    std::vector<double> g_hat(npix);
    for (std::size_t i = 0; i < npix; ++i)
        g_hat[i] = weight * (p.x[i] / p.t_hat[i] - (1.0 - p.x[i]) / (1.0 - p.t_hat[i]));

    std::vector<double> g_tilde(npix, 0.0);
    if (p.editor_active) {
        const int zd = state.cfg.editor.z_dim;
        std::vector<double> gz(zd, 0.0);
        filter_backward(p.editor_cache, g_hat, state.editor, grad.editor, g_tilde, gz);

        const double beta = weight * p.kl_weight;
        std::vector<double> gmu(zd), glv(zd);
        for (int i = 0; i < zd; ++i) {
            const double sd = std::exp(0.5 * p.posterior.log_var[i]);
            gmu[i] = gz[i] - beta * p.posterior.mu[i];
            glv[i] = gz[i] * p.noise[i] * 0.5 * sd - beta * 0.5 * (sd * sd - 1.0);
        }
        std::vector<double> g_in(state.encodes_residual() ? npix : 0, 0.0);
        encode_backward(p.encoder_cache, gmu, glv, state.encoder, grad.encoder, g_in);
        for (std::size_t i = 0; i < g_in.size(); ++i)
            g_tilde[i] -= g_in[i]; // residual = x - t_tilde
    } else {
        for (std::size_t i = 0; i < npix; ++i) {
            const double t = p.t_tilde[i];
            g_tilde[i] = (t > kProbEps && t < 1.0 - kProbEps) ? g_hat[i] : 0.0;
        }
    }

    std::vector<double> g_prob(npix, 0.0);
    if (p.attention) {
        SpatialParams gl;
        warp_backward(*p.attention, p.template_prob, g_tilde, g_prob, grad_lambda ? &gl : nullptr);
        if (grad_lambda) {
            auto gp = lambda_log_prior_grad(p.lambda, state.cfg.prior);
            for (int c = 0; c < SpatialParams::kCount; ++c)
                (*grad_lambda)[c] += gl[c] + weight * gp[c];
        }
    } else {
        g_prob = g_tilde;
    }

    auto& gt = grad.templates[p.k];
    for (std::size_t i = 0; i < npix; ++i) {
        const double pr = p.template_prob[i];
        gt[i] += g_prob[i] * pr * (1.0 - pr);
    }
}

ElboTerms component_terms(std::span<const double> x, int k, const SpatialParams& lambda, const MixtureState& state,
                          std::span<const double> noise, const ElboOptions& opts)
{
    return component_forward(x, k, lambda, state, noise, opts).terms;
}

double component_elbo(std::span<const double> x, int k, const SpatialParams& lambda, const MixtureState& state,
                      std::span<const double> noise, const ElboOptions& opts)
{
    return component_terms(x, k, lambda, state, noise, opts).value;
}

double example_objective_grad(std::span<const double> x, const MixtureState& state,
                              std::span<const SpatialParams> gamma_row, std::span<const std::vector<double>> noise_row,
                              MixtureState& grad, std::span<double> resp, std::span<SpatialParams> lambda_grads,
                              const ElboOptions& opts)
{
    const int K = state.K();
    auto log_pi = state.log_mixing_weights();
    std::vector<ComponentPass> passes;
    passes.reserve(K);
    std::vector<double> scores(K);
    for (int k = 0; k < K; ++k) {
        passes.push_back(component_forward(x, k, gamma_row[k], state, noise_row[k], opts));
        scores[k] = log_pi[k] + passes.back().terms.value;
    }
    const double lse = log_sum_exp(scores);
    const auto pi = state.mixing_weights();
    for (int k = 0; k < K; ++k) {
        resp[k] = std::exp(scores[k] - lse);
        SpatialParams gl;
        // unit weight for the gamma gradient, responsibility for the parameters
        ComponentPass& pass = passes[k];
        if (resp[k] > 1e-150) {
            component_backward(pass, state, resp[k], grad, &gl);
            for (int c = 0; c < SpatialParams::kCount; ++c)
                gl[c] /= resp[k];
        } else {
            MixtureState scratch = grad.zeros_like();
            component_backward(pass, state, 1.0, scratch, &gl);
        }
        lambda_grads[k] = gl;
        for (int j = 0; j < K; ++j)
            grad.pi_logits[j] += resp[k] * ((j == k ? 1.0 : 0.0) - pi[j]);
    }
    return lse;
}

BatchResult batch_objective_grad(std::span<const std::vector<double>> xs, const MixtureState& state,
                                 std::span<const SpatialParams> gammas, std::span<const std::vector<double>> noise,
                                 MixtureState& grad, const ElboOptions& opts)
{
    if (xs.empty())
        throw ArgumentError("batch_objective: empty batch");
    const std::size_t K = std::size_t(state.K());
    if (gammas.size() != xs.size() * K)
        throw ArgumentError("batch_objective: lambda table must hold one row per (example, component)");
    if (noise.size() != xs.size() * K)
        throw ArgumentError("batch_objective: noise must hold one vector per (example, component)");
    BatchResult r;
    r.responsibilities.resize(xs.size() * K);
    r.component_lambda_grads.resize(xs.size() * K);
    for (std::size_t d = 0; d < xs.size(); ++d)
        r.value += example_objective_grad(xs[d], state, gammas.subspan(d * K, K), noise.subspan(d * K, K), grad,
                                          std::span(r.responsibilities).subspan(d * K, K),
                                          std::span(r.component_lambda_grads).subspan(d * K, K), opts);
    return r;
}

double batch_objective(std::span<const std::vector<double>> xs, const MixtureState& state,
                       std::span<const SpatialParams> gammas, std::span<const std::vector<double>> noise,
                       const ElboOptions& opts)
{
    if (xs.empty())
        throw ArgumentError("batch_objective: empty batch");
    const std::size_t K = std::size_t(state.K());
    if (gammas.size() != xs.size() * K)
        throw ArgumentError("batch_objective: lambda table must hold one row per (example, component)");
    if (noise.size() != xs.size() * K)
        throw ArgumentError("batch_objective: noise must hold one vector per (example, component)");
    auto log_pi = state.log_mixing_weights();
    double total = 0;
    std::vector<double> scores(K);
    for (std::size_t d = 0; d < xs.size(); ++d) {
        for (std::size_t k = 0; k < K; ++k)
            scores[k] = log_pi[k] + component_elbo(xs[d], int(k), gammas[d * K + k], state, noise[d * K + k], opts);
        total += log_sum_exp(scores);
    }
    return total;
}

std::vector<double> component_scores(std::span<const double> x, const MixtureState& state,
                                     std::span<const SpatialParams> gamma_row)
{
    if (state.cfg.variant == Variant::ocular) {
        auto s = ocular_component_scores(x, state, OcularGrid::standard());
        auto log_pi = state.log_mixing_weights();
        for (int k = 0; k < state.K(); ++k)
            s[k] += log_pi[k];
        return s;
    }
    auto log_pi = state.log_mixing_weights();
    std::vector<double> zero(std::size_t(state.cfg.editor.z_dim), 0.0);
    std::vector<double> s(state.K());
    for (int k = 0; k < state.K(); ++k) {
        SpatialParams lambda = gamma_row.empty() ? SpatialParams{} : gamma_row[k];
        s[k] = log_pi[k] + component_elbo(x, k, lambda, state, zero);
    }
    return s;
}

int assign_cluster(std::span<const double> x, const MixtureState& state, std::span<const SpatialParams> gamma_row)
{
    auto s = component_scores(x, state, gamma_row);
    int best = 0;
    for (int k = 1; k < int(s.size()); ++k)
        if (s[k] > s[best])
            best = k;
    return best;
}

} // namespace typeclust
