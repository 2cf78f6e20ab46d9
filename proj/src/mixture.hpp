#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "editor.hpp"
#include "warp.hpp"

namespace typeclust {

enum class Variant { full, no_residual, vae_only, lambda_only, ocular };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name); // throws ArgumentError

struct ModelConfig {
    Variant variant = Variant::full;
    int K = 3;
    int canvas = kDefaultCanvas;
    double bandwidth = kDefaultBandwidth;
    SpatialPrior prior;
    EditorConfig editor;
    int encoder_channels1 = 8;
    int encoder_channels2 = 16;
};

// All learnable state. Templates are stored as logits (probabilities via
// sigmoid) and mixture weights as softmax logits.
struct MixtureState {
    ModelConfig cfg;
    std::vector<std::vector<double>> templates;
    std::vector<double> pi_logits;
    EditorParams editor;
    EncoderParams encoder;

    MixtureState() = default;
    explicit MixtureState(const ModelConfig& c); // zero-valued parameters

    static MixtureState initialized(const ModelConfig& c, nn::Rng& rng);
    MixtureState zeros_like() const { return MixtureState(cfg); }

    int K() const { return cfg.K; }
    int canvas() const { return cfg.canvas; }
    std::size_t pixel_count() const { return std::size_t(cfg.canvas) * cfg.canvas; }
    std::vector<double> mixing_weights() const;
    std::vector<double> log_mixing_weights() const;
    std::vector<double> template_probs(int k) const;

    bool uses_warp() const;
    bool uses_editor() const;
    bool encodes_residual() const;

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    bool all_finite() const;
};

// Per-(example, component) spatial parameters gamma_{k,d}.
struct LambdaTable {
    int K = 0;
    std::vector<SpatialParams> rows; // index d * K + k

    LambdaTable() = default;
    LambdaTable(std::size_t examples, int k) : K(k), rows(examples * std::size_t(k)) {}

    std::size_t examples() const { return K == 0 ? 0 : rows.size() / std::size_t(K); }
    SpatialParams& at(std::size_t d, int k) { return rows[d * std::size_t(K) + k]; }
    const SpatialParams& at(std::size_t d, int k) const { return rows[d * std::size_t(K) + k]; }
    std::span<const SpatialParams> row(std::size_t d) const { return std::span(rows).subspan(d * K, K); }
};

// sum_p x log t + (1 - x) log(1 - t)
double bernoulli_loglik(std::span<const double> x, std::span<const double> t_hat);

struct ElboOptions {
    double kl_weight = 1.0;
    bool editor_enabled = true; // false routes T_hat = clamp(T_tilde) and drops the KL term
};

struct ElboTerms {
    double loglik = 0;
    double lambda_prior = 0;
    double kl = 0;
    double value = 0; // loglik + lambda_prior - kl_weight * kl
};

// Everything the backward pass needs from one component evaluation.
struct ComponentPass {
    int k = 0;
    ElboTerms terms;
    std::vector<double> x;
    std::vector<double> template_prob;
    std::optional<AttentionMap> attention;
    std::vector<double> t_tilde;
    std::vector<double> t_hat;
    bool editor_active = false;
    EncoderCache encoder_cache;
    EditorPosterior posterior;
    std::vector<double> noise;
    EditorCache editor_cache;
    SpatialParams lambda;
    double kl_weight = 1.0;
};

ComponentPass component_forward(std::span<const double> x, int k, const SpatialParams& lambda,
                                const MixtureState& state, std::span<const double> noise,
                                const ElboOptions& opts = {});

// Accumulates weight * d(value)/d(params) into grad and weight * d(value)/d(lambda)
// into grad_lambda (if non-null).
void component_backward(const ComponentPass& pass, const MixtureState& state, double weight, MixtureState& grad,
                        SpatialParams* grad_lambda);

// Single-sample ELBO of component k; noise has z_dim entries (ignored when the
// variant has no editor).
double component_elbo(std::span<const double> x, int k, const SpatialParams& lambda, const MixtureState& state,
                      std::span<const double> noise, const ElboOptions& opts = {});
ElboTerms component_terms(std::span<const double> x, int k, const SpatialParams& lambda, const MixtureState& state,
                          std::span<const double> noise, const ElboOptions& opts = {});

struct BatchResult {
    double value = 0;
    std::vector<double> responsibilities;              // B x K
    std::vector<SpatialParams> component_lambda_grads; // B x K, unweighted d(elbo_k)/d(gamma)
};

// noise[d * K + k] holds the z-noise for example d and component k.
// sum_d log sum_k exp(log pi_k + elbo_{d,k}) with log-sum-exp stabilization.
double batch_objective(std::span<const std::vector<double>> xs, const MixtureState& state,
                       std::span<const SpatialParams> gammas, std::span<const std::vector<double>> noise,
                       const ElboOptions& opts = {});

// Same value plus gradients. The gradient of the objective w.r.t. gamma_{d,k}
// is responsibilities[d,k] * component_lambda_grads[d,k].
BatchResult batch_objective_grad(std::span<const std::vector<double>> xs, const MixtureState& state,
                                 std::span<const SpatialParams> gammas, std::span<const std::vector<double>> noise,
                                 MixtureState& grad, const ElboOptions& opts = {});

// Per-example piece used by the trainer: log-sum-exp over components, backward
// weighted by responsibilities.
double example_objective_grad(std::span<const double> x, const MixtureState& state,
                              std::span<const SpatialParams> gamma_row, std::span<const std::vector<double>> noise_row,
                              MixtureState& grad, std::span<double> responsibilities,
                              std::span<SpatialParams> lambda_grads, const ElboOptions& opts);

// log pi_k + component score with z at the posterior mean (ocular: exact
// per-component marginal).
std::vector<double> component_scores(std::span<const double> x, const MixtureState& state,
                                     std::span<const SpatialParams> gamma_row);

// argmax_k of component_scores; ties go to the smaller k.
int assign_cluster(std::span<const double> x, const MixtureState& state, std::span<const SpatialParams> gamma_row);

double log_sum_exp(std::span<const double> v);

} // namespace typeclust
