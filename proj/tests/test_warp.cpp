#include <doctest.h>

#include <cmath>
#include <numbers>

#include "checks.hpp"
#include "warp.hpp"

using namespace typeclust;

namespace {

constexpr int kCanvas = 32;

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Glyph-like block template with a clear background border.
std::vector<double> block_template(int canvas)
{
    std::vector<double> t(std::size_t(canvas) * canvas, 0.0);
    for (int i = 8; i < canvas - 8; ++i)
        for (int j = 10; j < canvas - 12; ++j)
            t[std::size_t(i) * canvas + j] = (i < 12 || j < 14) ? 1.0 : 0.0;
    return t;
}

} // namespace

TEST_SUITE("spatial-warp")
{
    TEST_CASE("identity attention keeps at least 0.98 on the own pixel")
    {
        const auto att = build_attention(SpatialParams{}, kCanvas);
        // Normalized Gaussian over the integer grid, written out independently.
        double denom = 0;
        for (int d = -6; d <= 6; ++d)
            denom += std::exp(-double(d * d) / (2 * 0.09));
        const double expected = 1.0 / (denom * denom);
        for (int i = 0; i < kCanvas; ++i)
            for (int j = 0; j < kCanvas; ++j) {
                const double w = att.weight(i, j, i, j);
                CHECK(w >= 0.98);
                if (i > 5 && i < kCanvas - 6 && j > 5 && j < kCanvas - 6)
                    CHECK(w == doctest::Approx(expected).epsilon(1e-12));
            }
    }

    TEST_CASE("translation and scaling conventions")
    {
        SpatialParams shift;
        shift.o_h = 2;
        const auto att = build_attention(shift, kCanvas);
        for (int i = 0; i < kCanvas; ++i)
            for (int j = 2; j < kCanvas; ++j) {
                const auto row = att.dense_row(i, j);
                const auto best = std::max_element(row.begin(), row.end()) - row.begin();
                CHECK(best == std::ptrdiff_t(i) * kCanvas + (j - 2));
            }

        SpatialParams scale;
        scale.a = 1.0;
        for (int canvas : {31, 32}) {
            const double c = (canvas - 1) / 2.0;
            const auto src = source_location(scale, canvas, canvas / 2, canvas / 2);
            if (canvas % 2 == 1) {
                CHECK(src.mode_y == doctest::Approx(c));
                CHECK(src.mode_x == doctest::Approx(c));
            }
            // Scaling about the center halves distances from it.
            const auto corner = source_location(scale, canvas, 0, 0);
            CHECK(corner.mode_y == doctest::Approx(c - c / 2));
            CHECK(corner.mode_x == doctest::Approx(c - c / 2));
        }
    }

    TEST_CASE("identity warp stays within 0.02 of the template")
    {
        check::Rng rng(1);
        for (int trial = 0; trial < 20; ++trial) {
            const auto t = trial % 2 ? check::random_probs(kCanvas * kCanvas, rng, 0.0, 1.0)
                                     : check::random_binary(kCanvas * kCanvas, rng, 0.5);
            CHECK(max_abs_diff(warp(t, kCanvas, SpatialParams{}), t) <= 0.02);
            GlyphImage img(kCanvas, kCanvas);
            img.pixels = t;
            CHECK(max_abs_diff(inverse_align(img, SpatialParams{}).pixels, t) <= 0.02);
        }
    }

    TEST_CASE("integer offsets match the discrete shift oracle")
    {
        check::Rng rng(2);
        const auto t = block_template(kCanvas);
        for (auto [dx, dy] : {std::pair{2, 0}, {0, 2}, {-1, 1}, {-2, -2}}) {
            SpatialParams lambda;
            lambda.o_h = dx;
            lambda.o_v = dy;
            CHECK(max_abs_diff(warp(t, kCanvas, lambda), check::discrete_shift(t, kCanvas, dx, dy)) <= 0.05);
        }
        auto smooth = check::smooth_glyph(kCanvas, rng);
        SpatialParams lambda;
        lambda.o_h = 2;
        CHECK(max_abs_diff(warp(smooth, kCanvas, lambda), check::discrete_shift(smooth, kCanvas, 2, 0)) <= 0.05);
    }

    TEST_CASE("warp is linear in the template")
    {
        check::Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            const auto t1 = check::random_probs(kCanvas * kCanvas, rng, 0.0, 1.0);
            const auto t2 = check::random_probs(kCanvas * kCanvas, rng, 0.0, 1.0);
            const double alpha = std::uniform_real_distribution<double>(0, 1)(rng);
            const auto lambda = check::random_lambda(rng, 2.0);
            std::vector<double> mix(t1.size());
            for (std::size_t p = 0; p < mix.size(); ++p)
                mix[p] = alpha * t1[p] + (1 - alpha) * t2[p];
            const auto w1 = warp(t1, kCanvas, lambda), w2 = warp(t2, kCanvas, lambda);
            const auto wm = warp(mix, kCanvas, lambda);
            for (std::size_t p = 0; p < mix.size(); ++p)
                CHECK(std::abs(wm[p] - (alpha * w1[p] + (1 - alpha) * w2[p])) <= 1e-6);
        }
    }

    TEST_CASE("attention rows are distributions for random lambda")
    {
        check::Rng rng(4);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto lambda = check::random_lambda(rng, 3.0);
            const auto att = build_attention(lambda, 12);
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j) {
                    const auto row = att.dense_row(i, j);
                    double s = 0;
                    bool nonneg = true;
                    for (double w : row) {
                        s += w;
                        nonneg = nonneg && w >= 0;
                    }
                    REQUIRE(nonneg);
                    REQUIRE(std::abs(s - 1.0) <= 1e-6);
                }
        }
    }

    TEST_CASE("warp of a [0,1] template stays in [0,1]")
    {
        check::Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            const auto t = check::random_binary(kCanvas * kCanvas, rng, 0.5);
            for (double v : warp(t, kCanvas, check::random_lambda(rng, 3.0)))
                REQUIRE((v >= 0.0 && v <= 1.0 + 1e-12));
        }
    }

    TEST_CASE("inverse alignment approximately undoes a small warp")
    {
        check::Rng rng(6);
        for (int trial = 0; trial < 20; ++trial) {
            GlyphImage img(kCanvas, kCanvas);
            img.pixels = check::smooth_glyph(kCanvas, rng);
            const auto lambda = check::random_lambda(rng, 1.0);
            const auto back = inverse_align(warp_image(img, lambda), lambda);
            double err = 0;
            for (std::size_t p = 0; p < img.size(); ++p)
                err += std::abs(back.pixels[p] - img.pixels[p]);
            CHECK(err / double(img.size()) <= 0.05);
        }
        SpatialParams l;
        l.a = 0.25;
        CHECK(l.inverse().scale() == doctest::Approx(0.8));
        CHECK_FALSE(SpatialParams{.a = -1.5}.valid());
    }

    TEST_CASE("lambda prior closed forms")
    {
        const SpatialPrior prior;
        const double sig[6] = {prior.sigma_r, prior.sigma_o, prior.sigma_o, prior.sigma_s, prior.sigma_s, prior.sigma_a};
        double mode = 0;
        for (double s : sig)
            mode += -0.5 * std::log(2 * std::numbers::pi * s * s);
        CHECK(lambda_log_prior(SpatialParams{}, prior) == doctest::Approx(mode).epsilon(1e-14));

        SpatialParams one;
        for (int c = 0; c < 6; ++c)
            one[c] = sig[c];
        CHECK(lambda_log_prior(one, prior) == doctest::Approx(mode - 3.0).epsilon(1e-14));

        check::Rng rng(7);
        for (int trial = 0; trial < 100; ++trial) {
            const auto l = check::random_lambda(rng, 2.0);
            double oracle = 0;
            for (int c = 0; c < 6; ++c)
                oracle += std::log(std::exp(-l[c] * l[c] / (2 * sig[c] * sig[c])) / (sig[c] * std::sqrt(2 * std::numbers::pi)));
            CHECK(std::abs(lambda_log_prior(l, prior) - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
            const auto g = lambda_log_prior_grad(l, prior);
            for (int c = 0; c < 6; ++c)
                CHECK(g[c] == doctest::Approx(-l[c] / (sig[c] * sig[c])).epsilon(1e-12));
        }
    }

    TEST_CASE("warp gradients match finite differences")
    {
        check::Rng rng(8);
        const auto stats = check::warp_gradients(rng, 100);
        INFO(stats.first_failure);
        CHECK(stats.points >= 100);
        CHECK(stats.ok());
    }
}
