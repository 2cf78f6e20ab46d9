#pragma once

#include <filesystem>

#include "image.hpp"

namespace typeclust {

// Reads an 8-bit grayscale PGM (P5) or PNG. Pixel values are scaled to [0,1];
// no resampling or normalization is applied.
GlyphImage read_image(const std::filesystem::path& path);

// Writes by extension: ".png" -> 8-bit grayscale PNG, anything else -> PGM P5.
// Values are clamped to [0,1] and quantized to round(255 * v).
void save_image(const GlyphImage& img, const std::filesystem::path& path);

void write_pgm(const GlyphImage& img, const std::filesystem::path& path);
void write_png(const GlyphImage& img, const std::filesystem::path& path);

} // namespace typeclust
