#pragma once

#include <string>
#include <vector>

#include "image.hpp"

namespace typeclust {

// A stroked outline in a unit box: x to the right, y downward.
struct Stroke {
    std::vector<std::pair<double, double>> points; // polyline
};

struct GlyphDesign {
    std::vector<Stroke> strokes;
    double stroke_width = 0.2;  // in units of the glyph height
};

// Letters with built-in designs: A B E F G H M N R W.
const std::vector<std::string>& builtin_classes();

// Three stroke designs per class that differ in one shape feature (arm
// length, crossbar height, leg shape, ...), standing in for distinct metal
// casts of the same letter.
int builtin_cast_count(const std::string& char_class);
GlyphDesign builtin_design(const std::string& char_class, int cast);

// Rasterizes with 4x4 supersampled coverage, binarized at half coverage.
GlyphImage render_design(const GlyphDesign& design, int canvas);

// One binary image per cast, with true_font = cast index.
std::vector<GlyphImage> builtin_casts(const std::string& char_class, int canvas = kDefaultCanvas);

} // namespace typeclust
