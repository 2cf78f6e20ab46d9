#include "editor.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace typeclust {

namespace {

nn::ConvShape filter_shape(const EditorConfig& c, int canvas)
{
    return {1, c.channels, c.kernel, 1, c.kernel / 2, canvas, canvas};
}

std::size_t kernel_block(const EditorConfig& c) { return std::size_t(c.channels) * c.kernel * c.kernel; }

} // namespace

EditorParams::EditorParams(const EditorConfig& c)
    : cfg(c),
      gen_hidden(c.z_dim, c.hidden),
      gen_out(c.hidden, int(kernel_block(c)) + c.channels),
      mix(c.channels, 0.0),
      skip_gain{0.0}
{
    if (c.z_dim < 1 || c.channels < 1 || c.hidden < 1 || c.kernel < 1 || c.kernel % 2 == 0)
        throw ArgumentError("EditorConfig: sizes must be positive and the kernel odd");
}

EditorParams EditorParams::initialized(const EditorConfig& c, nn::Rng& rng)
{
    EditorParams p(c);
    p.gen_hidden.init_uniform(rng);
    p.gen_out.init_uniform(rng, 0.1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (double& m : p.mix)
        m = u(rng);
    p.skip_gain[0] = 1.0;
    return p;
}

std::vector<std::span<double>> EditorParams::tensors()
{
    return {gen_hidden.w, gen_hidden.b, gen_out.w, gen_out.b, mix, skip_gain};
}

std::vector<std::span<const double>> EditorParams::tensors() const
{
    return {gen_hidden.w, gen_hidden.b, gen_out.w, gen_out.b, mix, skip_gain};
}

std::vector<double> filter_apply(std::span<const double> t_tilde, int canvas, std::span<const double> z,
                                 const EditorParams& theta, EditorCache* cache)
{
    const auto& c = theta.cfg;
    const std::size_t npix = std::size_t(canvas) * canvas;
    if (t_tilde.size() != npix)
        throw ArgumentError("filter_apply: warped template does not match canvas");
    if (z.size() != std::size_t(c.z_dim))
        throw ArgumentError("filter_apply: latent has dimension " + std::to_string(z.size()) + ", expected " +
                            std::to_string(c.z_dim));

    EditorCache local;
    EditorCache& k = cache ? *cache : local;
    k.canvas = canvas;
    k.t_tilde.assign(t_tilde.begin(), t_tilde.end());
    k.z.assign(z.begin(), z.end());
    k.gen_h.resize(c.hidden);
    theta.gen_hidden.forward(z, k.gen_h);
    nn::tanh_inplace(k.gen_h);
    k.gen_o.resize(theta.gen_out.out);
    theta.gen_out.forward(k.gen_h, k.gen_o);

    const auto shape = filter_shape(c, canvas);
    const std::size_t kb = kernel_block(c);
    k.act.resize(std::size_t(c.channels) * npix);
    nn::conv2d_forward(shape, t_tilde, std::span<const double>(k.gen_o).first(kb),
                       std::span<const double>(k.gen_o).subspan(kb, c.channels), k.act);
    nn::tanh_inplace(k.act);

    const double skip = theta.skip_gain[0];
    k.skip_in.resize(npix);
    k.prob.resize(npix);
    std::vector<double> out(npix);
    for (std::size_t p = 0; p < npix; ++p) {
        k.skip_in[p] = nn::logit(clamp_prob(t_tilde[p]));
        double l = skip * k.skip_in[p];
        for (int ch = 0; ch < c.channels; ++ch)
            l += theta.mix[ch] * k.act[ch * npix + p];
        k.prob[p] = nn::sigmoid(l);
        out[p] = clamp_prob(k.prob[p]);
    }
    return out;
}

void filter_backward(const EditorCache& k, std::span<const double> grad_out, const EditorParams& theta,
                     EditorParams& grad, std::span<double> grad_t_tilde, std::span<double> grad_z)
{
    const auto& c = theta.cfg;
    const std::size_t npix = std::size_t(k.canvas) * k.canvas;
    const double skip = theta.skip_gain[0];

    std::vector<double> gl(npix);
    for (std::size_t p = 0; p < npix; ++p) {
        const double pr = k.prob[p];
        gl[p] = (pr > kProbEps && pr < 1.0 - kProbEps) ? grad_out[p] * pr * (1.0 - pr) : 0.0;
    }

    double gskip = 0;
    for (std::size_t p = 0; p < npix; ++p) {
        gskip += gl[p] * k.skip_in[p];
        if (!grad_t_tilde.empty()) {
            const double t = k.t_tilde[p];
            if (t > kProbEps && t < 1.0 - kProbEps)
                grad_t_tilde[p] += gl[p] * skip / (t * (1.0 - t));
        }
    }
    grad.skip_gain[0] += gskip;

    std::vector<double> gact(std::size_t(c.channels) * npix);
    for (int ch = 0; ch < c.channels; ++ch) {
        double gm = 0;
        const double m = theta.mix[ch];
        const double* a = k.act.data() + ch * npix;
        double* ga = gact.data() + ch * npix;
        for (std::size_t p = 0; p < npix; ++p) {
            gm += gl[p] * a[p];
            ga[p] = gl[p] * m * (1.0 - a[p] * a[p]);
        }
        grad.mix[ch] += gm;
    }

    const auto shape = filter_shape(c, k.canvas);
    const std::size_t kb = kernel_block(c);
    std::vector<double> g_gen_o(k.gen_o.size(), 0.0);
    nn::conv2d_backward(shape, k.t_tilde, std::span<const double>(k.gen_o).first(kb), gact,
                        std::span<double>(g_gen_o).first(kb), std::span<double>(g_gen_o).subspan(kb, c.channels),
                        grad_t_tilde);

    std::vector<double> g_gen_h(c.hidden, 0.0);
    theta.gen_out.backward(k.gen_h, g_gen_o, grad.gen_out, g_gen_h);
    nn::tanh_backward(k.gen_h, g_gen_h);
    theta.gen_hidden.backward(k.z, g_gen_h, grad.gen_hidden, grad_z);
}

EncoderParams::EncoderParams(const EncoderConfig& c) : cfg(c)
{
    if (c.z_dim < 1 || c.components < 1 || c.canvas < 4 || c.channels1 < 1 || c.channels2 < 1)
        throw ArgumentError("EncoderConfig: sizes must be positive (canvas >= 4)");
    nn::ConvShape s1{1, c.channels1, 3, 2, 1, c.canvas, c.canvas};
    nn::ConvShape s2{c.channels1, c.channels2, 3, 2, 1, s1.out_h(), s1.out_w()};
    conv1 = nn::Conv2d(s1);
    conv2 = nn::Conv2d(s2);
    head = nn::Linear(int(s2.out_size()) + c.components, 2 * c.z_dim);
}

EncoderParams EncoderParams::initialized(const EncoderConfig& c, nn::Rng& rng)
{
    EncoderParams p(c);
    p.conv1.init_uniform(rng);
    p.conv2.init_uniform(rng);
    p.head.init_uniform(rng, 0.1);
    return p;
}

std::vector<std::span<double>> EncoderParams::tensors() { return {conv1.w, conv1.b, conv2.w, conv2.b, head.w, head.b}; }

std::vector<std::span<const double>> EncoderParams::tensors() const
{
    return {conv1.w, conv1.b, conv2.w, conv2.b, head.w, head.b};
}

EditorPosterior encode_residual(std::span<const double> residual, int k, const EncoderParams& phi,
                                EncoderCache* cache)
{
    const auto& c = phi.cfg;
    if (k < 0 || k >= c.components)
        throw ArgumentError("encode_residual: component " + std::to_string(k) + " out of range for K = " +
                            std::to_string(c.components));
    if (residual.size() != std::size_t(c.canvas) * c.canvas)
        throw ArgumentError("encode_residual: input does not match canvas");

    EncoderCache local;
    EncoderCache& e = cache ? *cache : local;
    e.input.assign(residual.begin(), residual.end());
    e.a1.resize(phi.conv1.shape.out_size());
    nn::conv2d_forward(phi.conv1.shape, residual, phi.conv1.w, phi.conv1.b, e.a1);
    nn::tanh_inplace(e.a1);
    e.a2.resize(phi.conv2.shape.out_size());
    nn::conv2d_forward(phi.conv2.shape, e.a1, phi.conv2.w, phi.conv2.b, e.a2);
    nn::tanh_inplace(e.a2);

    e.features.assign(e.a2.begin(), e.a2.end());
    e.features.resize(e.a2.size() + c.components, 0.0);
    e.features[e.a2.size() + k] = 1.0;

    std::vector<double> out(2 * c.z_dim);
    phi.head.forward(e.features, out);
    EditorPosterior post;
    post.mu.assign(out.begin(), out.begin() + c.z_dim);
    post.log_var.assign(out.begin() + c.z_dim, out.end());
    return post;
}

void encode_backward(const EncoderCache& e, std::span<const double> grad_mu, std::span<const double> grad_log_var,
                     const EncoderParams& phi, EncoderParams& grad, std::span<double> grad_input)
{
    const int zd = phi.cfg.z_dim;
    std::vector<double> gout(2 * zd);
    std::copy(grad_mu.begin(), grad_mu.end(), gout.begin());
    std::copy(grad_log_var.begin(), grad_log_var.end(), gout.begin() + zd);

    std::vector<double> gfeat(e.features.size(), 0.0);
    phi.head.backward(e.features, gout, grad.head, gfeat);

    std::vector<double> ga2(gfeat.begin(), gfeat.begin() + std::ptrdiff_t(e.a2.size()));
    nn::tanh_backward(e.a2, ga2);
    std::vector<double> ga1(e.a1.size(), 0.0);
    nn::conv2d_backward(phi.conv2.shape, e.a1, phi.conv2.w, ga2, grad.conv2.w, grad.conv2.b, ga1);
    nn::tanh_backward(e.a1, ga1);
    nn::conv2d_backward(phi.conv1.shape, e.input, phi.conv1.w, ga1, grad.conv1.w, grad.conv1.b, grad_input);
}

std::vector<double> sample_latent(const EditorPosterior& post, std::span<const double> noise)
{
    if (noise.size() != post.mu.size() || post.log_var.size() != post.mu.size())
        throw ArgumentError("sample_latent: noise dimension does not match posterior");
    std::vector<double> z(post.mu.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = post.mu[i] + std::exp(0.5 * post.log_var[i]) * noise[i];
    return z;
}

double kl_to_prior(const EditorPosterior& post)
{
    double kl = 0;
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        const double lv = post.log_var[i];
        kl += 0.5 * (post.mu[i] * post.mu[i] + std::exp(lv) - 1.0 - lv);
    }
    return kl;
}

} // namespace typeclust
