#include "trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <thread>

#include "errors.hpp"
#include "ocular.hpp"

namespace typeclust {

namespace {

// Examples per gradient buffer. Fixed so the reduction order does not depend
// on the thread count.
constexpr std::size_t kChunk = 4;

struct RowAdam {
    std::array<double, SpatialParams::kCount> m{}, v{};
    int t = 0;

    void ascend(SpatialParams& p, const SpatialParams& g, double lr)
    {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t;
        const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
        for (int i = 0; i < SpatialParams::kCount; ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            p[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn)
{
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t t = std::min<std::size_t>(std::size_t(threads), n);
    for (std::size_t w = 0; w < t; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t)
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

void zero(MixtureState& g)
{
    for (auto t : g.tensors())
        std::fill(t.begin(), t.end(), 0.0);
}

void add_into(MixtureState& dst, const MixtureState& src)
{
    auto d = dst.tensors();
    auto s = src.tensors();
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[i].size(); ++j)
            d[i][j] += s[i][j];
}

bool finite(const SpatialParams& p)
{
    for (int i = 0; i < SpatialParams::kCount; ++i)
        if (!std::isfinite(p[i]))
            return false;
    return true;
}

void init_templates(MixtureState& s, const std::vector<std::vector<double>>& xs, const TrainConfig& cfg,
                    nn::Rng& rng)
{
    std::uniform_real_distribution<double> jitter(-cfg.init_noise, cfg.init_noise);
    const std::size_t take = std::min<std::size_t>(std::size_t(std::max(cfg.init_images, 1)), xs.size());
    std::vector<std::size_t> idx(xs.size());
    for (int k = 0; k < s.K(); ++k) {
        std::iota(idx.begin(), idx.end(), std::size_t(0));
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        std::vector<double> mean(s.pixel_count(), 0.0);
        for (std::size_t i = 0; i < take; ++i)
            for (std::size_t p = 0; p < mean.size(); ++p)
                mean[p] += xs[idx[i]][p] / double(take);
        for (std::size_t p = 0; p < mean.size(); ++p) {
            double c = std::clamp(mean[p], cfg.init_clamp, 1.0 - cfg.init_clamp);
            s.templates[k][p] = nn::logit(c) + jitter(rng);
        }
    }
}

std::vector<std::span<double>> slice(std::vector<std::span<double>> v, std::size_t b, std::size_t e)
{
    return {v.begin() + std::ptrdiff_t(b), v.begin() + std::ptrdiff_t(e)};
}

std::vector<std::span<const double>> slice(std::vector<std::span<const double>> v, std::size_t b, std::size_t e)
{
    return {v.begin() + std::ptrdiff_t(b), v.begin() + std::ptrdiff_t(e)};
}

} // namespace

void TrainConfig::validate() const
{
    if (epochs < 1)
        throw ArgumentError("train: epochs must be >= 1");
    if (batch_size < 1)
        throw ArgumentError("train: batch_size must be >= 1");
    if (!(learning_rate > 0) || !(template_learning_rate > 0) || !(lambda_learning_rate > 0))
        throw ArgumentError("train: learning rates must be positive");
    if (model.K < 1)
        throw ArgumentError("train: K must be >= 1");
    if (kl_warmup_epochs < 0)
        throw ArgumentError("train: kl_warmup_epochs must be >= 0");
    if (!(binarize_threshold > 0 && binarize_threshold < 1))
        throw ArgumentError("train: binarize_threshold must lie in (0,1)");
    if (!(init_clamp > 0 && init_clamp < 0.5))
        throw ArgumentError("train: init_clamp must lie in (0, 0.5)");
}

std::vector<std::vector<double>> binarized_pixels(const std::vector<GlyphImage>& images, double threshold)
{
    std::vector<std::vector<double>> xs;
    xs.reserve(images.size());
    for (const auto& img : images)
        xs.push_back(binarize(img, threshold).pixels);
    return xs;
}

double kl_weight_for_epoch(int epoch, int warmup_epochs)
{
    if (warmup_epochs <= 0)
        return 1.0;
    return std::min(1.0, double(epoch) / double(warmup_epochs));
}

TrainResult train(const std::vector<GlyphImage>& dataset, const TrainConfig& cfg, const ProgressFn& progress)
{
    cfg.validate();
    if (dataset.empty())
        throw ArgumentError("train: empty dataset");
    for (const auto& img : dataset) {
        if (img.char_class != dataset.front().char_class)
            throw ArgumentError("train: dataset mixes character classes '" + dataset.front().char_class + "' and '" +
                                img.char_class + "'");
        if (img.height != cfg.model.canvas || img.width != cfg.model.canvas)
            throw ArgumentError("train: image size does not match the model canvas");
    }

    nn::Rng rng(cfg.seed);
    const auto xs = binarized_pixels(dataset, cfg.binarize_threshold);
    const std::size_t N = xs.size();
    const int K = cfg.model.K;

    TrainResult res;
    res.state = MixtureState::initialized(cfg.model, rng);
    init_templates(res.state, xs, cfg, rng);
    res.lambdas = LambdaTable(N, K);
    MixtureState& state = res.state;

    // templates + pi logits first, then editor and encoder tensors
    const std::size_t n_head = std::size_t(K) + 1;
    nn::Adam shape_opt(nn::AdamConfig{cfg.template_learning_rate});
    nn::Adam net_opt(nn::AdamConfig{cfg.learning_rate});
    std::vector<RowAdam> row_opt(N * std::size_t(K));

    const bool ocular = cfg.model.variant == Variant::ocular;
    const bool editor = state.uses_editor();
    const bool warps = state.uses_warp() && cfg.learn_lambda;
    const int zd = cfg.model.editor.z_dim;
    const std::size_t B = std::size_t(cfg.batch_size);
    const std::size_t max_chunks = (B + kChunk - 1) / kChunk;
    std::vector<MixtureState> chunk_grads(max_chunks, state.zeros_like());
    MixtureState total = state.zeros_like();

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::normal_distribution<double> normal(0.0, 1.0);
    int step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double beta = kl_weight_for_epoch(epoch, cfg.kl_warmup_epochs);
        const ElboOptions opts{beta, true};
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0;

        for (std::size_t start = 0; start < N; start += B, ++step) {
            const std::size_t nb = std::min(B, N - start);
            std::span<const std::size_t> batch(order.data() + start, nb);

            std::vector<std::vector<double>> noise(nb * K);
            if (editor)
                for (auto& v : noise) {
                    v.resize(zd);
                    for (double& e : v)
                        e = normal(rng);
                }

            std::vector<double> values(nb);
            std::vector<double> resp(nb * K);
            std::vector<SpatialParams> lgrads(nb * K);
            const std::size_t nchunks = (nb + kChunk - 1) / kChunk;
            parallel_for(nchunks, cfg.threads, [&](std::size_t c) {
                MixtureState& g = chunk_grads[c];
                zero(g);
                for (std::size_t i = c * kChunk; i < std::min(nb, (c + 1) * kChunk); ++i) {
                    const std::size_t d = batch[i];
                    if (ocular) {
                        values[i] = ocular_loglik_grad(xs[d], state, OcularGrid::standard(), g);
                    } else {
                        values[i] = example_objective_grad(
                            xs[d], state, res.lambdas.row(d), std::span(noise).subspan(i * K, K), g,
                            std::span(resp).subspan(i * K, K), std::span(lgrads).subspan(i * K, K), opts);
                    }
                }
            });

            double batch_sum = 0;
            for (double v : values)
                batch_sum += v;
            if (!std::isfinite(batch_sum))
                throw TrainingError("non-finite objective at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(step));
            epoch_sum += batch_sum;
            res.step_losses.push_back(-batch_sum / double(nb));

            zero(total);
            for (std::size_t c = 0; c < nchunks; ++c)
                add_into(total, chunk_grads[c]);

            auto params = state.tensors();
            auto grads = std::as_const(total).tensors();
            const std::size_t n_all = params.size();
            auto p_head = slice(params, 0, n_head);
            auto g_head = slice(grads, 0, n_head);
            shape_opt.step(p_head, g_head);
            if (editor) {
                auto p_net = slice(params, n_head, n_all);
                auto g_net = slice(grads, n_head, n_all);
                net_opt.step(p_net, g_net);
            }

            if (warps)
                for (std::size_t i = 0; i < nb; ++i)
                    for (int k = 0; k < K; ++k) {
                        const std::size_t row = batch[i] * std::size_t(K) + std::size_t(k);
                        row_opt[row].ascend(res.lambdas.rows[row], lgrads[i * K + k], cfg.lambda_learning_rate);
                        auto& lam = res.lambdas.rows[row];
                        // keep the warp well defined
                        lam.a = std::max(lam.a, -0.5);
                        lam.s_h = std::clamp(lam.s_h, -0.5, 0.5);
                        lam.s_v = std::clamp(lam.s_v, -0.5, 0.5);
                    }
        }

        if (!state.all_finite())
            throw TrainingError("non-finite parameter after epoch " + std::to_string(epoch));
        for (const auto& l : res.lambdas.rows)
            if (!finite(l))
                throw TrainingError("non-finite spatial parameter after epoch " + std::to_string(epoch));

        EpochLog log{epoch, epoch_sum / double(N), ocular ? 0.0 : beta};
        res.trace.push_back(log);
        if (progress)
            progress(log);
    }
    return res;
}

SpatialParams lambda_gradient(std::span<const double> x, int k, const SpatialParams& gamma, const MixtureState& state,
                              std::span<const double> noise, const ElboOptions& opts)
{
    auto pass = component_forward(x, k, gamma, state, noise, opts);
    MixtureState scratch = state.zeros_like();
    SpatialParams g;
    component_backward(pass, state, 1.0, scratch, &g);
    return g;
}

SpatialParams icm_step(std::span<const double> x, int k, const SpatialParams& gamma, const MixtureState& state,
                       double step_size, bool backtracking, std::span<const double> noise, const ElboOptions& opts)
{
    const SpatialParams g = lambda_gradient(x, k, gamma, state, noise, opts);
    auto moved = [&](double s) {
        SpatialParams out = gamma;
        for (int i = 0; i < SpatialParams::kCount; ++i)
            out[i] += s * g[i];
        return out;
    };
    if (!backtracking)
        return moved(step_size);

    const double before = component_elbo(x, k, gamma, state, noise, opts);
    double s = step_size;
    for (int halving = 0; halving <= 20; ++halving, s *= 0.5) {
        SpatialParams cand = moved(s);
        if (!cand.valid())
            continue;
        if (component_elbo(x, k, cand, state, noise, opts) >= before)
            return cand;
    }
    return gamma;
}

LambdaTable fit_lambda(std::span<const std::vector<double>> xs, const MixtureState& state, int steps,
                       double learning_rate, const LambdaTable* init)
{
    const int K = state.K();
    LambdaTable table = init ? *init : LambdaTable(xs.size(), K);
    if (table.examples() != xs.size() || table.K != K)
        throw ArgumentError("fit_lambda: initial table does not match the data");
    if (!state.uses_warp())
        return table;
    std::vector<double> zero(std::size_t(state.cfg.editor.z_dim), 0.0);
    for (std::size_t d = 0; d < xs.size(); ++d)
        for (int k = 0; k < K; ++k) {
            RowAdam opt;
            auto& lam = table.at(d, k);
            for (int s = 0; s < steps; ++s) {
                opt.ascend(lam, lambda_gradient(xs[d], k, lam, state, zero), learning_rate);
                lam.a = std::max(lam.a, -0.5);
                lam.s_h = std::clamp(lam.s_h, -0.5, 0.5);
                lam.s_v = std::clamp(lam.s_v, -0.5, 0.5);
            }
        }
    return table;
}

} // namespace typeclust
