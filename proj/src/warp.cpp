#include "warp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace typeclust {

double& SpatialParams::operator[](int idx)
{
    switch (idx) {
    case R: return r;
    case OH: return o_h;
    case OV: return o_v;
    case SH: return s_h;
    case SV: return s_v;
    case A: return a;
    }
    throw ArgumentError("SpatialParams: index out of range");
}

double SpatialParams::operator[](int idx) const { return const_cast<SpatialParams&>(*this)[idx]; }

bool SpatialParams::valid() const
{
    for (int k = 0; k < kCount; ++k)
        if (!std::isfinite((*this)[k]))
            return false;
    return scale() > 0.0 && (1.0 - s_h * s_v) > 0.0;
}

SpatialParams SpatialParams::inverse() const
{
    return {-r, -o_h, -o_v, -s_h, -s_v, 1.0 / scale() - 1.0};
}

double SpatialPrior::sigma(int idx) const
{
    switch (idx) {
    case SpatialParams::R: return sigma_r;
    case SpatialParams::OH:
    case SpatialParams::OV: return sigma_o;
    case SpatialParams::SH:
    case SpatialParams::SV: return sigma_s;
    case SpatialParams::A: return sigma_a;
    }
    throw ArgumentError("SpatialPrior: index out of range");
}

bool SpatialPrior::valid() const { return sigma_r > 0 && sigma_o > 0 && sigma_s > 0 && sigma_a > 0; }

PixelAttention source_location(const SpatialParams& l, int canvas, int i, int j)
{
    const double c = 0.5 * (canvas - 1);
    const double cr = std::cos(l.r), sr = std::sin(l.r);
    const double det = 1.0 - l.s_h * l.s_v;
    const double sc = l.scale();

    const double qx = j - c - l.o_h;
    const double qy = i - c - l.o_v;
    // undo rotation
    const double vx = cr * qx + sr * qy;
    const double vy = -sr * qx + cr * qy;
    // undo shear
    const double wx = (vx - l.s_h * vy) / det;
    const double wy = (vy - l.s_v * vx) / det;

    PixelAttention p;
    p.mode_x = c + wx / sc;
    p.mode_y = c + wy / sc;

    auto unshear = [&](double dvx, double dvy, int k) {
        p.dmode_x[k] = (dvx - l.s_h * dvy) / det / sc;
        p.dmode_y[k] = (dvy - l.s_v * dvx) / det / sc;
    };
    unshear(-cr, sr, SpatialParams::OH);
    unshear(-sr, -cr, SpatialParams::OV);
    unshear(-sr * qx + cr * qy, -cr * qx - sr * qy, SpatialParams::R);
    p.dmode_x[SpatialParams::SH] = -wy / det / sc;
    p.dmode_y[SpatialParams::SH] = l.s_v * wy / det / sc;
    p.dmode_x[SpatialParams::SV] = l.s_h * wx / det / sc;
    p.dmode_y[SpatialParams::SV] = -wx / det / sc;
    p.dmode_x[SpatialParams::A] = -wx / (sc * sc);
    p.dmode_y[SpatialParams::A] = -wy / (sc * sc);
    return p;
}

namespace {

// Normalized 1-D Gaussian weights around mode over the retained window.
void axis_weights(double mode, int canvas, double bandwidth, int& start, int& count,
                  std::array<double, kAttentionTaps>& w)
{
    int center = std::clamp(int(std::lround(std::clamp(mode, -1e6, 1e6))), 0, canvas - 1);
    start = std::max(0, center - kAttentionRadius);
    int stop = std::min(canvas - 1, center + kAttentionRadius);
    count = stop - start + 1;
    const double inv2b2 = 0.5 / (bandwidth * bandwidth);
    double best = -INFINITY;
    for (int t = 0; t < count; ++t) {
        double d = start + t - mode;
        w[t] = -d * d * inv2b2;
        best = std::max(best, w[t]);
    }
    double z = 0;
    for (int t = 0; t < count; ++t) {
        w[t] = std::exp(w[t] - best);
        z += w[t];
    }
    for (int t = 0; t < count; ++t)
        w[t] /= z;
    for (int t = count; t < kAttentionTaps; ++t)
        w[t] = 0;
}

} // namespace

AttentionMap build_attention(const SpatialParams& lambda, int canvas, double bandwidth)
{
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw ArgumentError("build_attention: bandwidth must be positive");
    if (canvas <= 0)
        throw ArgumentError("build_attention: canvas must be positive");
    if (!lambda.valid())
        throw ArgumentError("build_attention: spatial parameters must be finite with positive scale");

    AttentionMap att;
    att.canvas = canvas;
    att.bandwidth = bandwidth;
    att.pixels.resize(std::size_t(canvas) * canvas);
    for (int i = 0; i < canvas; ++i)
        for (int j = 0; j < canvas; ++j) {
            PixelAttention p = source_location(lambda, canvas, i, j);
            axis_weights(p.mode_y, canvas, bandwidth, p.y0, p.ny, p.wy);
            axis_weights(p.mode_x, canvas, bandwidth, p.x0, p.nx, p.wx);
            att.pixels[std::size_t(i) * canvas + j] = p;
        }
    return att;
}

double AttentionMap::weight(int i, int j, int u, int v) const
{
    const auto& p = pixels[std::size_t(i) * canvas + j];
    if (u < p.y0 || u >= p.y0 + p.ny || v < p.x0 || v >= p.x0 + p.nx)
        return 0.0;
    return p.wy[u - p.y0] * p.wx[v - p.x0];
}

std::vector<double> AttentionMap::dense_row(int i, int j) const
{
    std::vector<double> row(std::size_t(canvas) * canvas, 0.0);
    const auto& p = pixels[std::size_t(i) * canvas + j];
    for (int a = 0; a < p.ny; ++a)
        for (int b = 0; b < p.nx; ++b)
            row[std::size_t(p.y0 + a) * canvas + p.x0 + b] = p.wy[a] * p.wx[b];
    return row;
}

std::vector<double> apply_attention(const AttentionMap& att, std::span<const double> tmpl)
{
    const int n = att.canvas;
    if (tmpl.size() != std::size_t(n) * n)
        throw ArgumentError("warp: template size does not match canvas");
    std::vector<double> out(tmpl.size());
    for (std::size_t o = 0; o < out.size(); ++o) {
        const auto& p = att.pixels[o];
        double acc = 0;
        for (int a = 0; a < p.ny; ++a) {
            const double* row = tmpl.data() + std::size_t(p.y0 + a) * n + p.x0;
            double s = 0;
            for (int b = 0; b < p.nx; ++b)
                s += p.wx[b] * row[b];
            acc += p.wy[a] * s;
        }
        out[o] = acc;
    }
    return out;
}

std::vector<double> warp(std::span<const double> tmpl, int canvas, const SpatialParams& lambda, double bandwidth)
{
    return apply_attention(build_attention(lambda, canvas, bandwidth), tmpl);
}

void warp_backward(const AttentionMap& att, std::span<const double> tmpl, std::span<const double> grad_out,
                   std::span<double> grad_tmpl, SpatialParams* grad_lambda)
{
    const int n = att.canvas;
    const double inv_b2 = 1.0 / (att.bandwidth * att.bandwidth);
    std::array<double, SpatialParams::kCount> gl{};
    for (std::size_t o = 0; o < att.pixels.size(); ++o) {
        const double g = grad_out[o];
        if (g == 0.0)
            continue;
        const auto& p = att.pixels[o];
        if (!grad_tmpl.empty())
            for (int a = 0; a < p.ny; ++a) {
                double* row = grad_tmpl.data() + std::size_t(p.y0 + a) * n + p.x0;
                const double gy = g * p.wy[a];
                for (int b = 0; b < p.nx; ++b)
                    row[b] += gy * p.wx[b];
            }
        if (!grad_lambda)
            continue;
        // d out / d mode = (1/b^2) * weighted covariance of coordinate and value
        double mean_u = 0, mean_v = 0;
        for (int a = 0; a < p.ny; ++a)
            mean_u += p.wy[a] * (p.y0 + a);
        for (int b = 0; b < p.nx; ++b)
            mean_v += p.wx[b] * (p.x0 + b);
        double dy = 0, dx = 0;
        for (int a = 0; a < p.ny; ++a) {
            const double* row = tmpl.data() + std::size_t(p.y0 + a) * n + p.x0;
            double rowsum = 0, rowmom = 0;
            for (int b = 0; b < p.nx; ++b) {
                rowsum += p.wx[b] * row[b];
                rowmom += p.wx[b] * (p.x0 + b - mean_v) * row[b];
            }
            dy += p.wy[a] * (p.y0 + a - mean_u) * rowsum;
            dx += p.wy[a] * rowmom;
        }
        dy *= inv_b2 * g;
        dx *= inv_b2 * g;
        for (int k = 0; k < SpatialParams::kCount; ++k)
            gl[k] += dy * p.dmode_y[k] + dx * p.dmode_x[k];
    }
    if (grad_lambda)
        for (int k = 0; k < SpatialParams::kCount; ++k)
            (*grad_lambda)[k] += gl[k];
}

GlyphImage warp_image(const GlyphImage& img, const SpatialParams& lambda, double bandwidth)
{
    if (img.height != img.width)
        throw ArgumentError("warp: image must be square");
    GlyphImage out = img;
    out.pixels = warp(img.pixels, img.height, lambda, bandwidth);
    return out;
}

GlyphImage inverse_align(const GlyphImage& img, const SpatialParams& lambda, double bandwidth)
{
    return warp_image(img, lambda.inverse(), bandwidth);
}

double lambda_log_prior(const SpatialParams& lambda, const SpatialPrior& prior)
{
    double lp = 0;
    for (int k = 0; k < SpatialParams::kCount; ++k) {
        double s = prior.sigma(k);
        double x = lambda[k];
        lp += -0.5 * std::log(2.0 * std::numbers::pi * s * s) - 0.5 * x * x / (s * s);
    }
    return lp;
}

SpatialParams lambda_log_prior_grad(const SpatialParams& lambda, const SpatialPrior& prior)
{
    SpatialParams g;
    for (int k = 0; k < SpatialParams::kCount; ++k) {
        double s = prior.sigma(k);
        g[k] = -lambda[k] / (s * s);
    }
    return g;
}

} // namespace typeclust
