#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace typeclust {

inline constexpr int kDefaultCanvas = 32;

// A glyph raster with ink = 1 and background = 0, stored row-major.
struct GlyphImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;
    std::string char_class;
    std::optional<int> true_font;
    std::string source_id;

    GlyphImage() = default;
    GlyphImage(int h, int w, double fill = 0.0) : height(h), width(w), pixels(std::size_t(h) * w, fill) {}

    double& at(int i, int j) { return pixels[std::size_t(i) * width + j]; }
    double at(int i, int j) const { return pixels[std::size_t(i) * width + j]; }
    std::size_t size() const { return pixels.size(); }
};

// Bilinear resampling with pixel-center alignment, so an integer-factor
// downsample averages whole pixel blocks.
std::vector<double> resize_bilinear(std::span<const double> src, int src_h, int src_w, int dst_h, int dst_w);

// Affine rescale so min -> 0 and max -> 1. Constant images map to all zeros
// (or stay as-is when already inside [0,1] and constant at 0 or 1).
void normalize_minmax(std::span<double> pixels);

// Resample to canvas x canvas and min-max normalize.
GlyphImage normalize_to_canvas(const GlyphImage& img, int canvas);

// Pixel = 1 iff value >= threshold. threshold must lie in (0,1).
GlyphImage binarize(const GlyphImage& img, double threshold);

bool is_binary(const GlyphImage& img);

// Pixelwise mean of same-sized images.
GlyphImage mean_image(const std::vector<GlyphImage>& images);

// Per-pixel variance across the stack, averaged over pixels.
double stack_variance(const std::vector<GlyphImage>& images);

// Lays out rows of images on a background of `fill` with `gap` pixels between
// cells. Cells take the size of the largest image.
GlyphImage tile_grid(const std::vector<std::vector<GlyphImage>>& rows, int gap = 2, double fill = 0.5);

} // namespace typeclust
