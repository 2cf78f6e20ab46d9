#include "ocular.hpp"

#include <cmath>

#include "errors.hpp"

namespace typeclust {

OcularGrid OcularGrid::standard()
{
    OcularGrid g;
    for (int ov = -2; ov <= 2; ++ov)
        for (int oh = -2; oh <= 2; ++oh)
            g.offsets.emplace_back(oh, ov);
    g.exponents = {0.5, 0.75, 1.0, 1.25, 1.5};
    return g;
}

std::vector<double> shift_image(std::span<const double> in, int canvas, int o_h, int o_v)
{
    std::vector<double> out(in.size(), 0.0);
    for (int i = 0; i < canvas; ++i) {
        const int si = i - o_v;
        if (si < 0 || si >= canvas)
            continue;
        for (int j = 0; j < canvas; ++j) {
            const int sj = j - o_h;
            if (sj >= 0 && sj < canvas)
                out[std::size_t(i) * canvas + j] = in[std::size_t(si) * canvas + sj];
        }
    }
    return out;
}

namespace {

struct InkedTemplate {
    std::vector<double> log_q, log_1mq; // per template pixel
    std::vector<double> dq_dp;          // zero where clamped
    std::vector<double> q;
};

InkedTemplate inked(std::span<const double> prob, double g)
{
    InkedTemplate t;
    const std::size_t n = prob.size();
    t.log_q.resize(n);
    t.log_1mq.resize(n);
    t.dq_dp.resize(n);
    t.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double raw = std::pow(prob[i], g);
        const double q = clamp_prob(raw);
        t.q[i] = q;
        t.log_q[i] = std::log(q);
        t.log_1mq[i] = std::log1p(-q);
        t.dq_dp[i] = (raw > kProbEps && raw < 1.0 - kProbEps) ? g * std::pow(prob[i], g - 1.0) : 0.0;
    }
    return t;
}

// Log-likelihood of x under the template shifted by (o_h, o_v); pixels shifted
// in from outside the canvas have probability clamp(0) = eps.
double shifted_loglik(std::span<const double> x, const InkedTemplate& t, int canvas, int o_h, int o_v)
{
    const double out_on = std::log(kProbEps), out_off = std::log1p(-kProbEps);
    double ll = 0;
    for (int i = 0; i < canvas; ++i) {
        const int si = i - o_v;
        for (int j = 0; j < canvas; ++j) {
            const int sj = j - o_h;
            const double xv = x[std::size_t(i) * canvas + j];
            if (si < 0 || si >= canvas || sj < 0 || sj >= canvas) {
                ll += xv * out_on + (1 - xv) * out_off;
            } else {
                const std::size_t s = std::size_t(si) * canvas + sj;
                ll += xv * t.log_q[s] + (1 - xv) * t.log_1mq[s];
            }
        }
    }
    return ll;
}

void check(std::span<const double> x, const MixtureState& state, const OcularGrid& grid)
{
    if (x.size() != state.pixel_count())
        throw ArgumentError("ocular: image does not match canvas");
    if (grid.offsets.empty() || grid.exponents.empty())
        throw ArgumentError("ocular: empty latent grid");
}

} // namespace

std::vector<double> ocular_component_scores(std::span<const double> x, const MixtureState& state,
                                            const OcularGrid& grid)
{
    check(x, state, grid);
    const double log_prior = -std::log(double(grid.offsets.size())) - std::log(double(grid.exponents.size()));
    std::vector<double> scores(state.K());
    std::vector<double> terms;
    for (int k = 0; k < state.K(); ++k) {
        auto prob = state.template_probs(k);
        terms.clear();
        for (double g : grid.exponents) {
            auto t = inked(prob, g);
            for (auto [oh, ov] : grid.offsets)
                terms.push_back(log_prior + shifted_loglik(x, t, state.canvas(), oh, ov));
        }
        scores[k] = log_sum_exp(terms);
    }
    return scores;
}

double ocular_loglik(std::span<const double> x, const MixtureState& state, const OcularGrid& grid)
{
    auto s = ocular_component_scores(x, state, grid);
    auto lp = state.log_mixing_weights();
    for (int k = 0; k < state.K(); ++k)
        s[k] += lp[k];
    return log_sum_exp(s);
}

double ocular_loglik_grad(std::span<const double> x, const MixtureState& state, const OcularGrid& grid,
                          MixtureState& grad)
{
    check(x, state, grid);
    const int K = state.K();
    const int n = state.canvas();
    const std::size_t G = grid.exponents.size(), O = grid.offsets.size();
    const double log_prior = -std::log(double(O)) - std::log(double(G));
    auto log_pi = state.log_mixing_weights();

    std::vector<std::vector<double>> probs(K);
    std::vector<std::vector<InkedTemplate>> inks(K);
    std::vector<double> terms; // index (k, g, o)
    terms.reserve(K * G * O);
    for (int k = 0; k < K; ++k) {
        probs[k] = state.template_probs(k);
        for (double g : grid.exponents) {
            inks[k].push_back(inked(probs[k], g));
            for (auto [oh, ov] : grid.offsets)
                terms.push_back(log_pi[k] + log_prior + shifted_loglik(x, inks[k].back(), n, oh, ov));
        }
    }
    const double total = log_sum_exp(terms);

    const auto pi = state.mixing_weights();
    std::size_t idx = 0;
    for (int k = 0; k < K; ++k) {
        std::vector<double> gp(probs[k].size(), 0.0);
        double resp_k = 0;
        for (std::size_t gi = 0; gi < G; ++gi) {
            const auto& t = inks[k][gi];
            for (auto [oh, ov] : grid.offsets) {
                const double w = std::exp(terms[idx++] - total);
                resp_k += w;
                if (w < 1e-300)
                    continue;
                for (int i = 0; i < n; ++i) {
                    const int si = i - ov;
                    if (si < 0 || si >= n)
                        continue;
                    for (int j = 0; j < n; ++j) {
                        const int sj = j - oh;
                        if (sj < 0 || sj >= n)
                            continue;
                        const std::size_t s = std::size_t(si) * n + sj;
                        if (t.dq_dp[s] == 0.0)
                            continue;
                        const double xv = x[std::size_t(i) * n + j];
                        gp[s] += w * (xv / t.q[s] - (1 - xv) / (1 - t.q[s])) * t.dq_dp[s];
                    }
                }
            }
        }
        for (std::size_t s = 0; s < gp.size(); ++s)
            grad.templates[k][s] += gp[s] * probs[k][s] * (1 - probs[k][s]);
        for (int j = 0; j < K; ++j)
            grad.pi_logits[j] += resp_k * ((j == k ? 1.0 : 0.0) - pi[j]);
    }
    return total;
}

} // namespace typeclust
