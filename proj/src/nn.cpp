#include "nn.hpp"

#include <algorithm>

#include "errors.hpp"

namespace typeclust::nn {

void Linear::forward(std::span<const double> x, std::span<double> y) const
{
    for (int o = 0; o < out; ++o) {
        const double* row = w.data() + std::size_t(o) * in;
        double acc = b[o];
        for (int i = 0; i < in; ++i)
            acc += row[i] * x[i];
        y[o] = acc;
    }
}

void Linear::backward(std::span<const double> x, std::span<const double> gy, Linear& grad,
                      std::span<double> gx) const
{
    for (int o = 0; o < out; ++o) {
        const double g = gy[o];
        if (g == 0.0)
            continue;
        grad.b[o] += g;
        double* grow = grad.w.data() + std::size_t(o) * in;
        for (int i = 0; i < in; ++i)
            grow[i] += g * x[i];
        if (!gx.empty()) {
            const double* row = w.data() + std::size_t(o) * in;
            for (int i = 0; i < in; ++i)
                gx[i] += g * row[i];
        }
    }
}

void Linear::init_uniform(Rng& rng, double gain)
{
    const double bound = gain * std::sqrt(6.0 / double(in + out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : w)
        v = u(rng);
    std::fill(b.begin(), b.end(), 0.0);
}

void Conv2d::init_uniform(Rng& rng, double gain)
{
    const double fan_in = double(shape.in_ch) * shape.kernel * shape.kernel;
    const double fan_out = double(shape.out_ch) * shape.kernel * shape.kernel;
    const double bound = gain * std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : w)
        v = u(rng);
    std::fill(b.begin(), b.end(), 0.0);
}

namespace {

// Zero-padded copy of a [ch][h][w] tensor; padded rows are (w + 2·pad) wide.
std::vector<double> pad_input(const ConvShape& s, std::span<const double> in)
{
    const int ph = s.in_h + 2 * s.pad, pw = s.in_w + 2 * s.pad;
    std::vector<double> out(std::size_t(s.in_ch) * ph * pw, 0.0);
    for (int c = 0; c < s.in_ch; ++c)
        for (int y = 0; y < s.in_h; ++y) {
            const double* src = in.data() + (std::size_t(c) * s.in_h + y) * s.in_w;
            std::copy(src, src + s.in_w, out.data() + (std::size_t(c) * ph + y + s.pad) * pw + s.pad);
        }
    return out;
}

} // namespace

void conv2d_forward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel, st = s.stride;
    if (in.size() != std::size_t(s.in_ch) * s.in_h * s.in_w || out.size() != s.out_size() ||
        weight.size() != s.weight_size())
        throw ArgumentError("conv2d: shape mismatch");
    const int ph = s.in_h + 2 * s.pad, pw = s.in_w + 2 * s.pad;
    const std::vector<double> padded = pad_input(s, in);
    for (int o = 0; o < s.out_ch; ++o) {
        double* dst = out.data() + std::size_t(o) * oh * ow;
        std::fill(dst, dst + std::size_t(oh) * ow, bias.empty() ? 0.0 : bias[o]);
        for (int c = 0; c < s.in_ch; ++c) {
            const double* src = padded.data() + std::size_t(c) * ph * pw;
            const double* ker = weight.data() + (std::size_t(o) * s.in_ch + c) * k * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const double w = ker[ky * k + kx];
                    for (int y = 0; y < oh; ++y) {
                        const double* srow = src + std::size_t(y * st + ky) * pw + kx;
                        double* drow = dst + std::size_t(y) * ow;
                        for (int x = 0; x < ow; ++x)
                            drow[x] += w * srow[x * st];
                    }
                }
        }
    }
}

void conv2d_backward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                     std::span<const double> grad_out, std::span<double> grad_weight, std::span<double> grad_bias,
                     std::span<double> grad_in)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel, st = s.stride;
    const int ph = s.in_h + 2 * s.pad, pw = s.in_w + 2 * s.pad;
    const std::vector<double> padded = grad_weight.empty() ? std::vector<double>{} : pad_input(s, in);
    std::vector<double> gpad(grad_in.empty() ? 0 : std::size_t(s.in_ch) * ph * pw, 0.0);
    for (int o = 0; o < s.out_ch; ++o) {
        const double* gsrc = grad_out.data() + std::size_t(o) * oh * ow;
        if (!grad_bias.empty()) {
            double acc = 0;
            for (int t = 0; t < oh * ow; ++t)
                acc += gsrc[t];
            grad_bias[o] += acc;
        }
        for (int c = 0; c < s.in_ch; ++c) {
            const std::size_t kofs = (std::size_t(o) * s.in_ch + c) * k * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    if (!grad_weight.empty()) {
                        const double* src = padded.data() + std::size_t(c) * ph * pw;
                        double acc = 0;
                        for (int y = 0; y < oh; ++y) {
                            const double* srow = src + std::size_t(y * st + ky) * pw + kx;
                            const double* grow = gsrc + std::size_t(y) * ow;
                            for (int x = 0; x < ow; ++x)
                                acc += grow[x] * srow[x * st];
                        }
                        grad_weight[kofs + ky * k + kx] += acc;
                    }
                    if (!grad_in.empty()) {
                        const double w = weight[kofs + ky * k + kx];
                        double* dst = gpad.data() + std::size_t(c) * ph * pw;
                        for (int y = 0; y < oh; ++y) {
                            double* drow = dst + std::size_t(y * st + ky) * pw + kx;
                            const double* grow = gsrc + std::size_t(y) * ow;
                            for (int x = 0; x < ow; ++x)
                                drow[x * st] += w * grow[x];
                        }
                    }
                }
        }
    }
    if (!grad_in.empty())
        for (int c = 0; c < s.in_ch; ++c)
            for (int y = 0; y < s.in_h; ++y) {
                const double* src = gpad.data() + (std::size_t(c) * ph + y + s.pad) * pw + s.pad;
                double* dst = grad_in.data() + (std::size_t(c) * s.in_h + y) * s.in_w;
                for (int x = 0; x < s.in_w; ++x)
                    dst[x] += src[x];
            }
}

void Adam::step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
                bool ascend)
{
    if (params.size() != grads.size())
        throw ArgumentError("Adam: parameter/gradient tensor count mismatch");
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].size(), 0.0);
            v_[i].assign(params[i].size(), 0.0);
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    const double sign = ascend ? 1.0 : -1.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i];
        auto g = grads[i];
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1 - cfg_.beta2) * g[j] * g[j];
            p[j] += sign * cfg_.learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
        }
    }
}

} // namespace typeclust::nn
