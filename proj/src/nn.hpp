#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace typeclust::nn {

using Rng = std::mt19937_64;

struct Linear {
    int in = 0, out = 0;
    std::vector<double> w; // out x in, row-major
    std::vector<double> b;

    Linear() = default;
    Linear(int in_, int out_) : in(in_), out(out_), w(std::size_t(in_) * out_, 0.0), b(out_, 0.0) {}

    // y = W x + b
    void forward(std::span<const double> x, std::span<double> y) const;
    // grad.w += gy x^T, grad.b += gy, gx += W^T gy (gx may be empty)
    void backward(std::span<const double> x, std::span<const double> gy, Linear& grad, std::span<double> gx) const;
    void init_uniform(Rng& rng, double gain = 1.0);
};

// Dense 2-D convolution with zero padding over (channels, height, width) data.
struct ConvShape {
    int in_ch = 1, out_ch = 1, kernel = 3, stride = 1, pad = 0;
    int in_h = 0, in_w = 0;

    int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
    int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
    std::size_t weight_size() const { return std::size_t(out_ch) * in_ch * kernel * kernel; }
    std::size_t out_size() const { return std::size_t(out_ch) * out_h() * out_w(); }
};

// weight layout: [out_ch][in_ch][kernel][kernel]
void conv2d_forward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out);
// Accumulates into grad_weight, grad_bias and grad_in; any may be empty.
void conv2d_backward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> grad_out, std::span<double> grad_weight, std::span<double> grad_bias,
                     std::span<double> grad_in);

struct Conv2d {
    ConvShape shape;
    std::vector<double> w, b;

    Conv2d() = default;
    explicit Conv2d(const ConvShape& s) : shape(s), w(s.weight_size(), 0.0), b(s.out_ch, 0.0) {}
    void init_uniform(Rng& rng, double gain = 1.0);
};

inline void tanh_inplace(std::span<double> v)
{
    for (double& x : v)
        x = std::tanh(x);
}

// g *= 1 - y^2 where y = tanh(pre-activation)
inline void tanh_backward(std::span<const double> y, std::span<double> g)
{
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] *= 1.0 - y[i] * y[i];
}

inline double sigmoid(double x)
{
    if (x >= 0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Adam over a list of tensors; ascend = true maximizes.
struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam() = default;
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
              bool ascend = true);
    std::int64_t steps() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    std::int64_t t_ = 0;
};

} // namespace typeclust::nn
