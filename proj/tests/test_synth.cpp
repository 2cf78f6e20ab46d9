#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "errors.hpp"
#include "glyphs.hpp"
#include "synth.hpp"

using namespace typeclust;

namespace {

GlyphImage single_pixel(int n, int i, int j)
{
    GlyphImage img(n, n);
    img.at(i, j) = 1.0;
    return img;
}

// Window min/max written directly from the definition.
GlyphImage morph_oracle(const GlyphImage& img, bool dilate, int k)
{
    GlyphImage out(img.height, img.width);
    const int r = k / 2;
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j) {
            double v = dilate ? 0.0 : 1.0;
            for (int di = -r; di <= r; ++di)
                for (int dj = -r; dj <= r; ++dj) {
                    const int y = i + di, x = j + dj;
                    const double p = (y < 0 || y >= img.height || x < 0 || x >= img.width) ? 0.0 : img.at(y, x);
                    v = dilate ? std::max(v, p) : std::min(v, p);
                }
            out.at(i, j) = v;
        }
    return out;
}

} // namespace

TEST_SUITE("synth-perturb")
{
    TEST_CASE("morphology on single pixels and blocks")
    {
        const auto dot = single_pixel(9, 4, 4);
        const auto grown = morph(dot, MorphKind::dilate, 3);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j)
                CHECK(grown.at(i, j) == ((std::abs(i - 4) <= 1 && std::abs(j - 4) <= 1) ? 1.0 : 0.0));
        for (double p : morph(dot, MorphKind::erode, 3).pixels)
            CHECK(p == 0.0);

        GlyphImage block(11, 11);
        for (int i = 3; i < 8; ++i)
            for (int j = 3; j < 8; ++j)
                block.at(i, j) = 1.0;
        const auto opened = morph(morph(block, MorphKind::erode, 3), MorphKind::dilate, 3);
        CHECK(opened.pixels == block.pixels);
        CHECK(opened.pixels == morph_oracle(morph_oracle(block, false, 3), true, 3).pixels);
        CHECK_THROWS_AS(morph(block, MorphKind::erode, 2), ArgumentError);
        CHECK(morph(block, MorphKind::dilate, 1).pixels == block.pixels);
    }

    TEST_CASE("morphology matches the oracle and is monotone")
    {
        std::mt19937_64 rng(4);
        std::bernoulli_distribution b(0.4);
        for (int trial = 0; trial < 30; ++trial) {
            GlyphImage img(12, 12);
            for (double& p : img.pixels)
                p = b(rng);
            for (int k : {1, 3, 5}) {
                const auto e = morph(img, MorphKind::erode, k);
                const auto d = morph(img, MorphKind::dilate, k);
                CHECK(e.pixels == morph_oracle(img, false, k).pixels);
                CHECK(d.pixels == morph_oracle(img, true, k).pixels);
                for (std::size_t p = 0; p < img.size(); ++p) {
                    CHECK(e.pixels[p] <= img.pixels[p]);
                    CHECK(img.pixels[p] <= d.pixels[p]);
                }
            }
        }
    }

    TEST_CASE("corpus is balanced, labeled and deterministic")
    {
        const auto casts = builtin_casts("R");
        PerturbConfig cfg;
        const auto a = generate_corpus(casts, cfg, 7);
        const auto b = generate_corpus(casts, cfg, 7);
        REQUIRE(a.images.size() == 300);
        int counts[3] = {0, 0, 0};
        for (const auto& img : a.images) {
            REQUIRE(img.true_font.has_value());
            ++counts[*img.true_font];
            CHECK(img.char_class == "R");
            for (double p : img.pixels)
                CHECK((p >= 0.0 && p <= 1.0));
        }
        CHECK(counts[0] == 100);
        CHECK(counts[1] == 100);
        CHECK(counts[2] == 100);
        for (std::size_t i = 0; i < a.images.size(); ++i)
            CHECK(a.images[i].pixels == b.images[i].pixels);
        const auto c = generate_corpus(casts, cfg, 8);
        CHECK(c.images[0].pixels != a.images[0].pixels);
    }

    TEST_CASE("zero perturbation reproduces the base casts")
    {
        const auto casts = builtin_casts("A");
        PerturbConfig cfg;
        cfg.offset_range = cfg.rotation_range = cfg.shear_range = cfg.scale_range = 0;
        cfg.morph_kernel_sizes = {1};
        cfg.noise_sigma = 0;
        cfg.examples_per_cast = 3;
        const auto corpus = generate_corpus(casts, cfg, 1);
        for (const auto& img : corpus.images)
            CHECK(img.pixels == casts[std::size_t(*img.true_font)].pixels);
    }

    TEST_CASE("truth records regenerate every example exactly")
    {
        const auto casts = builtin_casts("G");
        PerturbConfig cfg;
        cfg.examples_per_cast = 20;
        const auto corpus = generate_corpus(casts, cfg, 3);
        const auto path = std::filesystem::temp_directory_path() / "typeclust_truth.jsonl";
        write_truth(corpus.truth, path);
        const auto truth = read_truth(path);
        REQUIRE(truth.size() == corpus.images.size());
        for (std::size_t i = 0; i < truth.size(); ++i) {
            CHECK(truth[i].lambda == corpus.truth[i].lambda);
            CHECK(truth[i].morphs == corpus.truth[i].morphs);
            const auto again = render_example(casts[std::size_t(truth[i].true_font)], truth[i], cfg.bandwidth);
            CHECK(again.pixels == corpus.images[i].pixels);
        }
    }

    TEST_CASE("argument checks")
    {
        const auto casts = builtin_casts("A");
        CHECK_THROWS_AS(generate_corpus({casts[0]}, PerturbConfig{}, 1), ArgumentError);
        PerturbConfig bad;
        bad.morph_kernel_sizes = {2};
        CHECK_THROWS_AS(bad.validate(), ArgumentError);
        bad = PerturbConfig{};
        bad.offset_range = -1;
        CHECK_THROWS_AS(bad.validate(), ArgumentError);
    }

    TEST_CASE("built-in casts are distinct binary glyphs")
    {
        for (const auto& cls : builtin_classes()) {
            const auto casts = builtin_casts(cls);
            REQUIRE(casts.size() == 3);
            for (std::size_t a = 0; a < casts.size(); ++a) {
                CHECK(is_binary(casts[a]));
                CHECK(casts[a].true_font == int(a));
                double ink = 0;
                for (double p : casts[a].pixels)
                    ink += p;
                CHECK(ink > 40);
                for (int i = 0; i < 32; ++i) // background border survives the largest offsets
                    CHECK(casts[a].at(0, i) + casts[a].at(31, i) + casts[a].at(i, 0) + casts[a].at(i, 31) == 0.0);
                for (std::size_t b = a + 1; b < casts.size(); ++b) {
                    int diff = 0;
                    for (std::size_t p = 0; p < casts[a].size(); ++p)
                        diff += casts[a].pixels[p] != casts[b].pixels[p];
                    CHECK(diff >= 10);
                }
            }
        }
    }
}
