#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "corpus.hpp"
#include "glyphs.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "image_io.hpp"

using namespace typeclust;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("typeclust_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

GlyphImage random_image(int h, int w, std::mt19937_64& rng)
{
    GlyphImage img(h, w);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& p : img.pixels)
        p = u(rng);
    return img;
}

// Independent bilinear oracle: maps output pixel centres to source coordinates
// and interpolates the four neighbours with edge clamping.
std::vector<double> bilinear_oracle(const GlyphImage& src, int oh, int ow)
{
    std::vector<double> out(std::size_t(oh) * ow);
    for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
            double sy = (i + 0.5) * src.height / double(oh) - 0.5;
            double sx = (j + 0.5) * src.width / double(ow) - 0.5;
            sy = std::clamp(sy, 0.0, src.height - 1.0);
            sx = std::clamp(sx, 0.0, src.width - 1.0);
            const int y0 = int(sy), x0 = int(sx);
            const int y1 = std::min(y0 + 1, src.height - 1), x1 = std::min(x0 + 1, src.width - 1);
            const double fy = sy - y0, fx = sx - x0;
            out[std::size_t(i) * ow + j] = (1 - fy) * ((1 - fx) * src.at(y0, x0) + fx * src.at(y0, x1)) +
                                           fy * ((1 - fx) * src.at(y1, x0) + fx * src.at(y1, x1));
        }
    return out;
}

} // namespace

TEST_SUITE("glyph-corpus")
{
    TEST_CASE("binarize thresholds at >= t")
    {
        GlyphImage img(1, 2);
        img.pixels = {0.4, 0.6};
        CHECK(binarize(img, 0.5).pixels == std::vector<double>{0.0, 1.0});
        GlyphImage zero(4, 4, 0.0);
        CHECK(binarize(zero, 0.5).pixels == zero.pixels);
        CHECK_THROWS_AS(binarize(img, 0.0), ArgumentError);
        CHECK_THROWS_AS(binarize(img, 1.0), ArgumentError);
        CHECK_THROWS_AS(binarize(img, -0.2), ArgumentError);
    }

    TEST_CASE("binarize matches a brute-force count")
    {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const auto img = random_image(32, 32, rng);
            std::size_t expected = 0;
            for (double p : img.pixels)
                expected += p >= 0.5;
            const auto b = binarize(img, 0.5);
            std::size_t ones = 0;
            for (double p : b.pixels)
                ones += p == 1.0;
            CHECK(ones == expected);
            CHECK(is_binary(b));
        }
    }

    TEST_CASE("bilinear downsample matches an independent oracle and keeps the mean")
    {
        // A rendered glyph keeps pure ink and background after the 2x block average,
        // so min-max normalization leaves the resampled values alone.
        auto img = render_design(builtin_design("R", 1), 64);
        const auto out = normalize_to_canvas(img, 32);
        REQUIRE(out.height == 32);
        REQUIRE(out.width == 32);
        const auto oracle = bilinear_oracle(img, 32, 32);
        double mean_in = 0, mean_out = 0, max_diff = 0;
        for (double p : img.pixels)
            mean_in += p / double(img.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            mean_out += out.pixels[i] / double(out.size());
            max_diff = std::max(max_diff, std::abs(out.pixels[i] - oracle[i]));
        }
        CHECK(max_diff <= 1e-12);
        CHECK(std::abs(mean_in - mean_out) <= 0.02);
        std::mt19937_64 rng(3);
        img = random_image(64, 48, rng);
        const auto raw = resize_bilinear(img.pixels, 64, 48, 32, 20);
        const auto random_oracle = bilinear_oracle(img, 32, 20);
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(raw[i] == doctest::Approx(random_oracle[i]).epsilon(1e-12));
    }

    TEST_CASE("normalization is idempotent")
    {
        std::mt19937_64 rng(5);
        const auto once = normalize_to_canvas(random_image(40, 24, rng), 32);
        const auto twice = normalize_to_canvas(once, 32);
        for (std::size_t i = 0; i < once.size(); ++i)
            CHECK(std::abs(once.pixels[i] - twice.pixels[i]) <= 1e-6);
    }

    TEST_CASE("image round trips within quantization")
    {
        const auto dir = scratch_dir("io");
        std::mt19937_64 rng(9);
        GlyphImage gray(3, 3, 0.503);
        for (const char* ext : {".pgm", ".png"}) {
            save_image(gray, dir / (std::string("g") + ext));
            const auto back = read_image(dir / (std::string("g") + ext));
            CHECK(std::abs(back.pixels[4] - 0.503) <= 1.0 / 255);
            const auto bin = binarize(random_image(32, 32, rng), 0.5);
            save_image(bin, dir / (std::string("b") + ext));
            CHECK(read_image(dir / (std::string("b") + ext)).pixels == bin.pixels);
        }
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto img = random_image(8, 8, rng);
            const auto path = dir / (i % 2 ? "r.png" : "r.pgm");
            save_image(img, path);
            const auto back = read_image(path);
            for (std::size_t p = 0; p < img.size(); ++p)
                worst = std::max(worst, std::abs(img.pixels[p] - back.pixels[p]));
        }
        CHECK(worst <= 1.0 / 255 + 1e-12);
    }

    TEST_CASE("read errors")
    {
        const auto dir = scratch_dir("ioerr");
        CHECK_THROWS_AS(read_image(dir / "missing.pgm"), IoError);
        std::ofstream(dir / "junk.pgm") << "P6\n2 2\n255\nxxxxxxxxxxxx";
        CHECK_THROWS_AS(read_image(dir / "junk.pgm"), FormatError);
        CHECK_THROWS_AS(save_image(GlyphImage(2, 2), dir / "no" / "such" / "dir" / "x.pgm"), IoError);
    }

    TEST_CASE("manifest round trip and dataset loading")
    {
        const auto dir = scratch_dir("manifest");
        std::mt19937_64 rng(1);
        std::vector<GlyphImage> images;
        for (int i = 0; i < 4; ++i) {
            auto img = binarize(random_image(32, 32, rng), 0.5);
            img.char_class = i < 2 ? "a" : "B";
            if (i != 3)
                img.true_font = i % 2;
            img.source_id = "src" + std::to_string(i);
            images.push_back(img);
        }
        const auto manifest = save_dataset(images, dir);
        const auto loaded = load_dataset(manifest);
        REQUIRE(loaded.size() == images.size());
        for (std::size_t i = 0; i < images.size(); ++i) {
            CHECK(loaded[i].pixels == images[i].pixels);
            CHECK(loaded[i].char_class == images[i].char_class);
            CHECK(loaded[i].true_font == images[i].true_font);
            CHECK(loaded[i].source_id == images[i].source_id);
        }
        CHECK(class_labels(loaded) == std::vector<std::string>{"a", "B"});
        CHECK(select_class(loaded, "B").size() == 2);
    }

    TEST_CASE("two valid entries load in order")
    {
        const auto dir = scratch_dir("two");
        GlyphImage a(64, 64, 0.0), b(32, 32, 0.0);
        a.at(10, 10) = 1.0;
        b.at(5, 5) = 1.0;
        save_image(a, dir / "a.png");
        save_image(b, dir / "b.pgm");
        std::ofstream(dir / "m.jsonl") << R"({"path":"a.png","char_class":"x"})" << "\n"
                                       << R"({"path":"b.pgm","char_class":"y","true_font":2})" << "\n";
        const auto ds = load_dataset(dir / "m.jsonl");
        REQUIRE(ds.size() == 2);
        CHECK(ds[0].char_class == "x");
        CHECK(ds[0].height == 32);
        CHECK(ds[1].true_font == 2);
    }

    TEST_CASE("manifest errors name the problem")
    {
        const auto dir = scratch_dir("bad");
        std::ofstream(dir / "m.jsonl") << R"({"path":"absent.pgm","char_class":"x"})" << "\n";
        try {
            load_dataset(dir / "m.jsonl");
            FAIL("expected an error");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("absent.pgm") != std::string::npos);
        }
        std::ofstream(dir / "u.jsonl") << R"({"path":"a.pgm","char_class":"x","colour":1})" << "\n";
        CHECK_THROWS_AS(read_manifest(dir / "u.jsonl"), FormatError);
        std::ofstream(dir / "c.jsonl") << R"({"path":"a.pgm","char_class":"%"})" << "\n";
        CHECK_THROWS_AS(read_manifest(dir / "c.jsonl"), FormatError);
        CHECK_THROWS_AS(read_manifest(dir / "nothing.jsonl"), IoError);
    }
}
