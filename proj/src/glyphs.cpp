#include "glyphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "errors.hpp"

namespace typeclust {

namespace {

using Pt = std::pair<double, double>;

Stroke line(double x0, double y0, double x1, double y1) { return {{{x0, y0}, {x1, y1}}}; }

Stroke poly(std::initializer_list<Pt> pts) { return {std::vector<Pt>(pts)}; }

// Elliptical arc from angle a0 to a1 (radians, y downward, 0 = +x).
Stroke arc(double cx, double cy, double rx, double ry, double a0, double a1, int segments = 16)
{
    Stroke s;
    for (int i = 0; i <= segments; ++i) {
        double t = a0 + (a1 - a0) * i / segments;
        s.points.emplace_back(cx + rx * std::cos(t), cy + ry * std::sin(t));
    }
    return s;
}

// Bowl attached to a stem at x = x0 spanning y0..y1 and reaching out to x1.
std::vector<Stroke> bowl(double x0, double y0, double y1, double x1)
{
    const double r = (y1 - y0) / 2;
    const double straight = std::max(x1 - r - x0, 0.0);
    std::vector<Stroke> s;
    s.push_back(line(x0, y0, x0 + straight, y0));
    s.push_back(line(x0, y1, x0 + straight, y1));
    s.push_back(arc(x0 + straight, y0 + r, x1 - x0 - straight, r, -std::numbers::pi / 2, std::numbers::pi / 2));
    return s;
}

void append(std::vector<Stroke>& dst, const std::vector<Stroke>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

using Builder = GlyphDesign (*)(int);

GlyphDesign design_A(int cast)
{
    const double bar[] = {0.64, 0.50, 0.76};
    GlyphDesign g;
    g.strokes = {line(0.05, 1.0, 0.5, 0.0), line(0.5, 0.0, 0.95, 1.0)};
    double y = bar[cast];
    g.strokes.push_back(line(0.05 + 0.45 * (1 - y), y, 0.95 - 0.45 * (1 - y), y));
    return g;
}

GlyphDesign design_B(int cast)
{
    const double split[] = {0.47, 0.36, 0.58};
    const double upper_x[] = {0.78, 0.66, 0.86};
    GlyphDesign g;
    g.strokes = {line(0.15, 0.0, 0.15, 1.0)};
    append(g.strokes, bowl(0.15, 0.0, split[cast], upper_x[cast]));
    append(g.strokes, bowl(0.15, split[cast], 1.0, 0.9));
    return g;
}

GlyphDesign design_E(int cast)
{
    const double mid[] = {0.72, 0.45, 0.72};
    const double top[] = {0.85, 0.85, 0.62};
    GlyphDesign g;
    g.strokes = {line(0.15, 0.0, 0.15, 1.0), line(0.15, 0.0, top[cast], 0.0), line(0.15, 0.5, mid[cast], 0.5),
                 line(0.15, 1.0, 0.88, 1.0)};
    return g;
}

GlyphDesign design_F(int cast)
{
    const double mid[] = {0.75, 0.42, 0.75};
    const double mid_y[] = {0.5, 0.5, 0.36};
    GlyphDesign g;
    g.strokes = {line(0.2, 0.0, 0.2, 1.0), line(0.2, 0.0, 0.88, 0.0), line(0.2, mid_y[cast], mid[cast], mid_y[cast])};
    return g;
}

GlyphDesign design_G(int cast)
{
    const double bar_x[] = {0.55, 0.72, 0.55};
    GlyphDesign g;
    g.strokes = {arc(0.5, 0.5, 0.42, 0.5, -0.25 * std::numbers::pi, -1.95 * std::numbers::pi, 24)};
    g.strokes.back().points.front() = {0.5 + 0.42 * std::cos(-0.25 * std::numbers::pi), 0.5 + 0.5 * std::sin(-0.25 * std::numbers::pi)};
    g.strokes.push_back(line(0.92, 0.55, 0.92, 0.95));
    g.strokes.push_back(line(bar_x[cast], 0.55, 0.92, 0.55));
    if (cast == 2)
        g.strokes.push_back(line(0.92, 0.95, 0.92, 1.1)); // spur
    return g;
}

GlyphDesign design_H(int cast)
{
    const double bar[] = {0.5, 0.32, 0.68};
    GlyphDesign g;
    g.strokes = {line(0.12, 0.0, 0.12, 1.0), line(0.88, 0.0, 0.88, 1.0), line(0.12, bar[cast], 0.88, bar[cast])};
    return g;
}

GlyphDesign design_M(int cast)
{
    const double vertex[] = {1.0, 0.62, 1.0};
    const double splay[] = {0.0, 0.0, 0.08};
    GlyphDesign g;
    double s = splay[cast];
    g.strokes = {line(0.05 + s, 0.0, 0.05, 1.0), line(0.95 - s, 0.0, 0.95, 1.0),
                 poly({{0.05 + s, 0.0}, {0.5, vertex[cast]}, {0.95 - s, 0.0}})};
    return g;
}

GlyphDesign design_N(int cast)
{
    const double right_top[] = {0.0, 0.0, 0.25};
    const double diag_end[] = {1.0, 0.75, 1.0};
    GlyphDesign g;
    g.strokes = {line(0.12, 0.0, 0.12, 1.0), line(0.88, right_top[cast], 0.88, 1.0),
                 line(0.12, 0.0, 0.88, diag_end[cast])};
    return g;
}

GlyphDesign design_R(int cast)
{
    GlyphDesign g;
    g.strokes = {line(0.15, 0.0, 0.15, 1.0)};
    append(g.strokes, bowl(0.15, 0.0, 0.52, 0.82));
    switch (cast) {
    case 0: g.strokes.push_back(line(0.4, 0.52, 0.9, 1.0)); break;              // straight diagonal leg
    case 1: g.strokes.push_back(poly({{0.45, 0.52}, {0.68, 0.62}, {0.72, 1.0}})); break; // steep bent leg
    default: g.strokes.push_back(arc(0.45, 1.0, 0.45, 0.48, -std::numbers::pi / 2, 0.0)); break; // curved leg
    }
    return g;
}

GlyphDesign design_W(int cast)
{
    const double inner[] = {0.0, 0.0, 0.35};
    const double outer_bottom[] = {0.28, 0.2, 0.28};
    GlyphDesign g;
    double b = outer_bottom[cast];
    g.strokes = {poly({{0.02, 0.0}, {b, 1.0}, {0.5, inner[cast]}, {1.0 - b, 1.0}, {0.98, 0.0}})};
    return g;
}

const std::map<std::string, Builder>& builders()
{
    static const std::map<std::string, Builder> table = {
        {"A", design_A}, {"B", design_B}, {"E", design_E}, {"F", design_F}, {"G", design_G},
        {"H", design_H}, {"M", design_M}, {"N", design_N}, {"R", design_R}, {"W", design_W},
    };
    return table;
}

double segment_distance(double px, double py, Pt a, Pt b)
{
    const double dx = b.first - a.first, dy = b.second - a.second;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - a.first) * dx + (py - a.second) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = a.first + t * dx - px, ey = a.second + t * dy - py;
    return std::sqrt(ex * ex + ey * ey);
}

} // namespace

const std::vector<std::string>& builtin_classes()
{
    static const std::vector<std::string> classes = {"A", "B", "E", "F", "G", "H", "M", "N", "R", "W"};
    return classes;
}

int builtin_cast_count(const std::string& char_class)
{
    if (!builders().count(char_class))
        throw ArgumentError("no built-in design for class '" + char_class + "'");
    return 3;
}

GlyphDesign builtin_design(const std::string& char_class, int cast)
{
    auto it = builders().find(char_class);
    if (it == builders().end())
        throw ArgumentError("no built-in design for class '" + char_class + "'");
    if (cast < 0 || cast >= 3)
        throw ArgumentError("built-in cast index must be 0, 1 or 2");
    return it->second(cast);
}

GlyphImage render_design(const GlyphDesign& design, int canvas)
{
    // glyph box: cap height ~ 0.62 canvas, centered
    const double height = 0.62 * canvas;
    const double width = 0.56 * canvas;
    const double top = 0.5 * (canvas - height);
    const double left = 0.5 * (canvas - width);
    const double half = 0.5 * design.stroke_width * height;

    std::vector<std::pair<Pt, Pt>> segs;
    for (const auto& s : design.strokes)
        for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
            auto map = [&](Pt p) { return Pt{left + p.first * width, top + p.second * height}; };
            segs.emplace_back(map(s.points[i]), map(s.points[i + 1]));
        }

    GlyphImage img(canvas, canvas);
    constexpr int ss = 4;
    for (int i = 0; i < canvas; ++i)
        for (int j = 0; j < canvas; ++j) {
            int hits = 0;
            for (int a = 0; a < ss; ++a)
                for (int b = 0; b < ss; ++b) {
                    const double py = i + (a + 0.5) / ss, px = j + (b + 0.5) / ss;
                    for (const auto& [p0, p1] : segs)
                        if (segment_distance(px, py, p0, p1) <= half) {
                            ++hits;
                            break;
                        }
                }
            img.at(i, j) = hits * 2 >= ss * ss ? 1.0 : 0.0;
        }
    return img;
}

std::vector<GlyphImage> builtin_casts(const std::string& char_class, int canvas)
{
    std::vector<GlyphImage> out;
    const int n = builtin_cast_count(char_class);
    for (int c = 0; c < n; ++c) {
        GlyphImage img = render_design(builtin_design(char_class, c), canvas);
        img.char_class = char_class;
        img.true_font = c;
        img.source_id = "builtin:" + char_class + ":" + std::to_string(c);
        out.push_back(std::move(img));
    }
    return out;
}

} // namespace typeclust
