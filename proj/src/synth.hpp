#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "image.hpp"
#include "warp.hpp"

namespace typeclust {

enum class MorphKind { erode, dilate };

// Square all-ones structuring element, zero padding outside the canvas:
// erode = window minimum, dilate = window maximum.
GlyphImage morph(const GlyphImage& img, MorphKind kind, int kernel_size);

struct PerturbConfig {
    double offset_range = 2.0;     // o_h, o_v ~ U[-r, r] pixels
    double rotation_range = 0.05;  // radians
    double shear_range = 0.05;
    double scale_range = 0.05;     // a ~ U[-r, r], scale = 1 + a
    std::vector<int> morph_kernel_sizes{1, 3};
    double noise_sigma = 0.05;
    int examples_per_cast = 100;
    double bandwidth = kDefaultBandwidth; // resampling sharpness for the affine step

    void validate() const; // throws ArgumentError
};

struct MorphStep {
    MorphKind kind = MorphKind::erode;
    int kernel = 1;
    bool operator==(const MorphStep&) const = default;
};

// Everything needed to regenerate one synthetic example from its base cast.
struct TruthRecord {
    std::size_t index = 0;
    std::string char_class;
    int true_font = 0;
    SpatialParams lambda;
    std::vector<MorphStep> morphs;
    std::uint64_t noise_seed = 0;
    double noise_sigma = 0;
};

struct SyntheticCorpus {
    std::vector<GlyphImage> images;
    std::vector<TruthRecord> truth;
};

// Affine perturbation (then re-binarized) -> morphology -> additive Gaussian
// pixel noise -> clamp to [0,1].
GlyphImage render_example(const GlyphImage& base_cast, const TruthRecord& rec, double bandwidth = kDefaultBandwidth);

// examples_per_cast examples per cast, cast-major order. Each example draws
// from its own generator seeded from (seed, class, index), so the output does
// not depend on evaluation order.
SyntheticCorpus generate_corpus(const std::vector<GlyphImage>& base_casts, const PerturbConfig& cfg,
                                std::uint64_t seed);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t index);

void write_truth(const std::vector<TruthRecord>& truth, const std::filesystem::path& path);
std::vector<TruthRecord> read_truth(const std::filesystem::path& path);

} // namespace typeclust
