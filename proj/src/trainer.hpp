#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "image.hpp"
#include "mixture.hpp"

namespace typeclust {

struct TrainConfig {
    ModelConfig model;
    int epochs = 200;
    int batch_size = 32;
    double learning_rate = 1e-3;          // editor, encoder
    double template_learning_rate = 1e-3; // templates, mixture logits
    double lambda_learning_rate = 1e-2;   // gamma rows
    int kl_warmup_epochs = 20;
    std::uint64_t seed = 0;
    double binarize_threshold = 0.5;
    int init_images = 20;
    double init_noise = 0.05;
    double init_clamp = 0.02; // template init probabilities clamped to [c, 1 - c]
    bool learn_lambda = true;
    int threads = 1;

    void validate() const; // throws ArgumentError
};

struct EpochLog {
    int epoch = 0;
    double objective = 0; // mean per-example objective at this epoch's KL weight
    double kl_weight = 0;
};

struct TrainResult {
    MixtureState state;
    LambdaTable lambdas;
    std::vector<EpochLog> trace;
    std::vector<double> step_losses; // mean per-example negative objective per step
};

using ProgressFn = std::function<void(const EpochLog&)>;

// Images are binarized at cfg.binarize_threshold before use.
std::vector<std::vector<double>> binarized_pixels(const std::vector<GlyphImage>& images, double threshold);

double kl_weight_for_epoch(int epoch, int warmup_epochs);

TrainResult train(const std::vector<GlyphImage>& dataset, const TrainConfig& cfg, const ProgressFn& progress = {});

// One plain gradient-ascent step on component_elbo w.r.t. lambda with the
// noise held fixed. With backtracking, the step is halved (at most 20 times)
// until the objective does not decrease; if none qualifies lambda is returned
// unchanged.
SpatialParams icm_step(std::span<const double> x, int k, const SpatialParams& gamma, const MixtureState& state,
                       double step_size, bool backtracking, std::span<const double> noise,
                       const ElboOptions& opts = {});

// d component_elbo / d lambda
SpatialParams lambda_gradient(std::span<const double> x, int k, const SpatialParams& gamma, const MixtureState& state,
                              std::span<const double> noise, const ElboOptions& opts = {});

// Fits gamma rows for (possibly unseen) binary images against a fixed model
// using Adam on each row with z at the posterior mean.
LambdaTable fit_lambda(std::span<const std::vector<double>> xs, const MixtureState& state, int steps,
                       double learning_rate, const LambdaTable* init = nullptr);

} // namespace typeclust
