#include "image.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace typeclust {

std::vector<double> resize_bilinear(std::span<const double> src, int src_h, int src_w, int dst_h, int dst_w)
{
    if (src_h <= 0 || src_w <= 0 || dst_h <= 0 || dst_w <= 0 || src.size() != std::size_t(src_h) * src_w)
        throw ArgumentError("resize_bilinear: invalid dimensions");

    std::vector<double> dst(std::size_t(dst_h) * dst_w);
    const double sy = double(src_h) / dst_h;
    const double sx = double(src_w) / dst_w;
    for (int i = 0; i < dst_h; ++i) {
        double fy = std::clamp((i + 0.5) * sy - 0.5, 0.0, double(src_h - 1));
        int y0 = int(std::floor(fy));
        int y1 = std::min(y0 + 1, src_h - 1);
        double ty = fy - y0;
        for (int j = 0; j < dst_w; ++j) {
            double fx = std::clamp((j + 0.5) * sx - 0.5, 0.0, double(src_w - 1));
            int x0 = int(std::floor(fx));
            int x1 = std::min(x0 + 1, src_w - 1);
            double tx = fx - x0;
            double top = src[std::size_t(y0) * src_w + x0] * (1 - tx) + src[std::size_t(y0) * src_w + x1] * tx;
            double bot = src[std::size_t(y1) * src_w + x0] * (1 - tx) + src[std::size_t(y1) * src_w + x1] * tx;
            dst[std::size_t(i) * dst_w + j] = top * (1 - ty) + bot * ty;
        }
    }
    return dst;
}

void normalize_minmax(std::span<double> pixels)
{
    if (pixels.empty())
        return;
    auto [lo, hi] = std::minmax_element(pixels.begin(), pixels.end());
    double mn = *lo, mx = *hi;
    if (mx - mn <= 0.0) {
        // constant image: keep 0/1 constants, anything else has no contrast
        double v = (mn == 1.0) ? 1.0 : 0.0;
        std::fill(pixels.begin(), pixels.end(), v);
        return;
    }
    for (double& p : pixels)
        p = (p - mn) / (mx - mn);
}

GlyphImage normalize_to_canvas(const GlyphImage& img, int canvas)
{
    if (canvas <= 0)
        throw ArgumentError("normalize_to_canvas: canvas must be positive");
    GlyphImage out = img;
    out.height = canvas;
    out.width = canvas;
    if (img.height != canvas || img.width != canvas)
        out.pixels = resize_bilinear(img.pixels, img.height, img.width, canvas, canvas);
    normalize_minmax(out.pixels);
    return out;
}

GlyphImage binarize(const GlyphImage& img, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ArgumentError("binarize: threshold must lie in (0,1), got " + std::to_string(threshold));
    GlyphImage out = img;
    for (double& p : out.pixels)
        p = p >= threshold ? 1.0 : 0.0;
    return out;
}

bool is_binary(const GlyphImage& img)
{
    return std::all_of(img.pixels.begin(), img.pixels.end(), [](double p) { return p == 0.0 || p == 1.0; });
}

GlyphImage mean_image(const std::vector<GlyphImage>& images)
{
    if (images.empty())
        throw ArgumentError("mean_image: empty stack");
    GlyphImage out(images.front().height, images.front().width);
    for (const auto& img : images) {
        if (img.height != out.height || img.width != out.width)
            throw ArgumentError("mean_image: images differ in size");
        for (std::size_t p = 0; p < out.size(); ++p)
            out.pixels[p] += img.pixels[p];
    }
    for (double& v : out.pixels)
        v /= double(images.size());
    return out;
}

double stack_variance(const std::vector<GlyphImage>& images)
{
    const GlyphImage mean = mean_image(images);
    double total = 0;
    for (const auto& img : images)
        for (std::size_t p = 0; p < mean.size(); ++p) {
            const double d = img.pixels[p] - mean.pixels[p];
            total += d * d;
        }
    return total / (double(images.size()) * double(mean.size()));
}

GlyphImage tile_grid(const std::vector<std::vector<GlyphImage>>& rows, int gap, double fill)
{
    int cell_h = 0, cell_w = 0, cols = 0;
    for (const auto& row : rows) {
        cols = std::max(cols, int(row.size()));
        for (const auto& img : row) {
            cell_h = std::max(cell_h, img.height);
            cell_w = std::max(cell_w, img.width);
        }
    }
    const int n_rows = int(rows.size());
    if (n_rows == 0 || cols == 0)
        throw ArgumentError("tile_grid: nothing to lay out");
    GlyphImage out(n_rows * cell_h + (n_rows + 1) * gap, cols * cell_w + (cols + 1) * gap, fill);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < int(rows[r].size()); ++c) {
            const auto& img = rows[r][c];
            const int y0 = gap + r * (cell_h + gap), x0 = gap + c * (cell_w + gap);
            for (int i = 0; i < img.height; ++i)
                for (int j = 0; j < img.width; ++j)
                    out.at(y0 + i, x0 + j) = img.at(i, j);
        }
    return out;
}

} // namespace typeclust
