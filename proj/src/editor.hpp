#pragma once

#include <span>
#include <vector>

#include "nn.hpp"

namespace typeclust {

// Probabilities handed to the Bernoulli likelihood never leave [eps, 1 - eps].
inline constexpr double kProbEps = 1e-4;

inline double clamp_prob(double p) { return p < kProbEps ? kProbEps : (p > 1.0 - kProbEps ? 1.0 - kProbEps : p); }

struct EditorConfig {
    int z_dim = 32;
    int channels = 8;   // generated kernels
    int kernel = 5;     // generated kernel width (odd)
    int hidden = 64;    // kernel-generator hidden width
};

// Filter parameters (theta): a two-layer generator maps z to `channels`
// kernels plus per-kernel biases; the filtered channels are squashed with tanh
// and collapsed by `mix`; a logit-space skip connection carries the input.
struct EditorParams {
    EditorConfig cfg;
    nn::Linear gen_hidden;
    nn::Linear gen_out;
    std::vector<double> mix;
    std::vector<double> skip_gain{1.0};

    EditorParams() = default;
    explicit EditorParams(const EditorConfig& c);

    static EditorParams initialized(const EditorConfig& c, nn::Rng& rng);
    EditorParams zeros_like() const { return EditorParams(cfg); }

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
};

struct EditorCache {
    int canvas = 0;
    std::vector<double> t_tilde;
    std::vector<double> z;
    std::vector<double> gen_h;     // tanh hidden
    std::vector<double> gen_o;     // kernels then biases
    std::vector<double> act;       // channels x canvas^2, tanh(conv)
    std::vector<double> skip_in;   // logit(clamp(t_tilde))
    std::vector<double> prob;      // sigmoid output before clamp
};

// T_hat = clamp(sigmoid(skip * logit(clamp(t)) + mix . tanh(conv(t, kernels(z)) + bias(z))))
std::vector<double> filter_apply(std::span<const double> t_tilde, int canvas, std::span<const double> z,
                                 const EditorParams& theta, EditorCache* cache = nullptr);

// Accumulates gradients given d/dT_hat. grad_t_tilde and grad_z may be empty.
void filter_backward(const EditorCache& cache, std::span<const double> grad_out, const EditorParams& theta,
                     EditorParams& grad, std::span<double> grad_t_tilde, std::span<double> grad_z);

struct EditorPosterior {
    std::vector<double> mu;
    std::vector<double> log_var;
};

struct EncoderConfig {
    int z_dim = 32;
    int components = 1;
    int canvas = 32;
    int channels1 = 8;
    int channels2 = 16;
};

// Inference network (phi): two stride-2 3x3 convolutions (tanh) whose flattened
// features, concatenated with a one-hot component id, feed a linear head that
// emits (mu, log_var).
struct EncoderParams {
    EncoderConfig cfg;
    nn::Conv2d conv1;
    nn::Conv2d conv2;
    nn::Linear head;

    EncoderParams() = default;
    explicit EncoderParams(const EncoderConfig& c);

    static EncoderParams initialized(const EncoderConfig& c, nn::Rng& rng);
    EncoderParams zeros_like() const { return EncoderParams(cfg); }
    int feature_count() const { return int(conv2.shape.out_size()); }

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
};

struct EncoderCache {
    std::vector<double> input;
    std::vector<double> a1, a2;
    std::vector<double> features; // flattened a2 followed by one-hot k
};

EditorPosterior encode_residual(std::span<const double> residual, int k, const EncoderParams& phi,
                                EncoderCache* cache = nullptr);

void encode_backward(const EncoderCache& cache, std::span<const double> grad_mu, std::span<const double> grad_log_var,
                     const EncoderParams& phi, EncoderParams& grad, std::span<double> grad_input);

// z = mu + exp(log_var / 2) * noise
std::vector<double> sample_latent(const EditorPosterior& post, std::span<const double> noise);

// KL(N(mu, diag(exp(log_var))) || N(0, I))
double kl_to_prior(const EditorPosterior& post);

} // namespace typeclust
