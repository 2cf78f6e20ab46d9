#pragma once

#include <array>
#include <span>
#include <vector>

#include "image.hpp"

namespace typeclust {

// Interpretable spatial adjustment: rotation (radians), offsets (pixels),
// shears (unitless) and scale offset a with effective scale 1 + a.
struct SpatialParams {
    static constexpr int kCount = 6;
    enum Index { R = 0, OH, OV, SH, SV, A };

    double r = 0, o_h = 0, o_v = 0, s_h = 0, s_v = 0, a = 0;

    double scale() const { return 1.0 + a; }
    double& operator[](int idx);
    double operator[](int idx) const;
    bool valid() const; // finite, 1 + a > 0, shear invertible

    // Component-wise inverse used for alignment: negated rotation, offsets and
    // shears; reciprocal scale.
    SpatialParams inverse() const;

    bool operator==(const SpatialParams&) const = default;
};

struct SpatialPrior {
    double sigma_r = 0.03;
    double sigma_o = 1.5;
    double sigma_s = 0.03;
    double sigma_a = 0.05;

    double sigma(int idx) const;
    bool valid() const;
};

inline constexpr double kDefaultBandwidth = 0.3;

// Taps kept on each side of the attention mode. Gaussian mass beyond this
// radius is below 1e-29 of the retained mass at bandwidth 0.3.
inline constexpr int kAttentionRadius = 4;
inline constexpr int kAttentionTaps = 2 * kAttentionRadius + 1;

// Attention of one output pixel. The isotropic Gaussian factorizes into row and
// column weights; the 2-D weight on input (u, v) is wy[u - y0] * wx[v - x0].
struct PixelAttention {
    int y0 = 0, x0 = 0, ny = 0, nx = 0;
    std::array<double, kAttentionTaps> wy{}, wx{};
    double mode_y = 0, mode_x = 0;
    std::array<double, SpatialParams::kCount> dmode_y{}, dmode_x{};
};

struct AttentionMap {
    int canvas = 0;
    double bandwidth = 0;
    std::vector<PixelAttention> pixels; // row-major over output pixels

    // Weight output pixel (i,j) puts on input pixel (u,v).
    double weight(int i, int j, int u, int v) const;
    // Full canvas x canvas distribution for one output pixel.
    std::vector<double> dense_row(int i, int j) const;
};

// Source location attended to by output pixel (i,j): the inverse of
// scale -> shear -> rotate (about the canvas center) -> translate.
PixelAttention source_location(const SpatialParams& lambda, int canvas, int i, int j);

AttentionMap build_attention(const SpatialParams& lambda, int canvas, double bandwidth = kDefaultBandwidth);

// warped(i,j) = sum over inputs of attention weight * template value.
std::vector<double> apply_attention(const AttentionMap& att, std::span<const double> tmpl);

std::vector<double> warp(std::span<const double> tmpl, int canvas, const SpatialParams& lambda,
                         double bandwidth = kDefaultBandwidth);

// Accumulates d(loss)/d(template) into grad_tmpl and d(loss)/d(lambda) into
// grad_lambda given d(loss)/d(warped) in grad_out.
void warp_backward(const AttentionMap& att, std::span<const double> tmpl, std::span<const double> grad_out,
                   std::span<double> grad_tmpl, SpatialParams* grad_lambda);

GlyphImage warp_image(const GlyphImage& img, const SpatialParams& lambda, double bandwidth = kDefaultBandwidth);

// Reverse-applies lambda to an observed image, mapping it back to the
// template frame.
GlyphImage inverse_align(const GlyphImage& img, const SpatialParams& lambda, double bandwidth = kDefaultBandwidth);

// Sum of independent zero-mean Gaussian log densities.
double lambda_log_prior(const SpatialParams& lambda, const SpatialPrior& prior);
SpatialParams lambda_log_prior_grad(const SpatialParams& lambda, const SpatialPrior& prior);

} // namespace typeclust
