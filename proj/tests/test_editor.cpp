#include <doctest.h>

#include <cmath>

#include "checks.hpp"
#include "editor.hpp"

using namespace typeclust;

namespace {

constexpr int kCanvas = 16;

EditorParams random_editor(const EditorConfig& cfg, std::uint64_t seed)
{
    nn::Rng rng(seed);
    auto theta = EditorParams::initialized(cfg, rng);
    // larger generator outputs so the filtered path is far from identity
    for (double& w : theta.gen_out.w)
        w *= 10.0;
    return theta;
}

} // namespace

TEST_SUITE("neural-editor")
{
    TEST_CASE("filter output respects the probability clamp")
    {
        check::Rng rng(1);
        const EditorConfig cfg{6, 4, 5, 12};
        for (int trial = 0; trial < 30; ++trial) {
            const auto theta = random_editor(cfg, 100 + trial);
            std::vector<double> t(kCanvas * kCanvas);
            for (double& v : t)
                v = std::uniform_int_distribution<int>(0, 2)(rng) / 2.0; // hits 0 and 1 exactly
            const auto z = check::random_normal(cfg.z_dim, rng, 3.0);
            for (double p : filter_apply(t, kCanvas, z, theta)) {
                REQUIRE(p >= kProbEps);
                REQUIRE(p <= 1.0 - kProbEps);
            }
        }
    }

    TEST_CASE("a pixel only influences its kernel-sized neighborhood")
    {
        check::Rng rng(2);
        const EditorConfig cfg{4, 3, 5, 8};
        const auto theta = random_editor(cfg, 7);
        const auto t = check::random_probs(kCanvas * kCanvas, rng);
        const auto z = check::random_normal(cfg.z_dim, rng);
        const auto base = filter_apply(t, kCanvas, z, theta);
        for (auto [pi, pj] : {std::pair{0, 0}, {7, 9}, {15, 3}}) {
            auto moved = t;
            moved[std::size_t(pi) * kCanvas + pj] += 0.3;
            const auto out = filter_apply(moved, kCanvas, z, theta);
            int changed_inside = 0;
            for (int i = 0; i < kCanvas; ++i)
                for (int j = 0; j < kCanvas; ++j) {
                    const bool inside = std::abs(i - pi) <= 2 && std::abs(j - pj) <= 2;
                    const bool changed = out[std::size_t(i) * kCanvas + j] != base[std::size_t(i) * kCanvas + j];
                    if (!inside)
                        CHECK_FALSE(changed);
                    changed_inside += changed;
                }
            CHECK(changed_inside > 1);
        }
    }

    TEST_CASE("zero generator output with unit skip gain is the identity")
    {
        check::Rng rng(3);
        const EditorConfig cfg{5, 4, 5, 8};
        auto theta = random_editor(cfg, 9);
        std::fill(theta.gen_out.w.begin(), theta.gen_out.w.end(), 0.0);
        std::fill(theta.gen_out.b.begin(), theta.gen_out.b.end(), 0.0);
        theta.skip_gain[0] = 1.0;
        auto t = check::random_probs(kCanvas * kCanvas, rng, 0.0, 1.0);
        t[0] = 0.0;
        t[1] = 1.0;
        const auto out = filter_apply(t, kCanvas, check::random_normal(cfg.z_dim, rng), theta);
        for (std::size_t p = 0; p < t.size(); ++p)
            CHECK(out[p] == doctest::Approx(clamp_prob(t[p])).epsilon(1e-12));
    }

    TEST_CASE("encoder is deterministic, reads k and emits 2 z_dim values")
    {
        check::Rng rng(4);
        const EncoderConfig cfg{7, 3, kCanvas, 4, 6};
        nn::Rng init(5);
        const auto phi = EncoderParams::initialized(cfg, init);
        auto residual = check::random_normal(kCanvas * kCanvas, rng, 0.5);
        for (double& r : residual)
            r = std::clamp(r, -1.0, 1.0);
        const auto a = encode_residual(residual, 1, phi);
        const auto b = encode_residual(residual, 1, phi);
        CHECK(a.mu == b.mu);
        CHECK(a.log_var == b.log_var);
        CHECK(a.mu.size() == 7);
        CHECK(a.log_var.size() == 7);
        CHECK(phi.head.out == 14);
        const auto c = encode_residual(residual, 2, phi);
        CHECK(c.mu != a.mu);
        CHECK_THROWS(encode_residual(residual, 3, phi));
    }

    TEST_CASE("reparameterized sampling")
    {
        EditorPosterior post{{0.5, -1.0, 2.0}, {-30.0, -30.0, -30.0}};
        const std::vector<double> noise{1.3, -0.7, 2.2};
        const auto z = sample_latent(post, noise);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(z[i] - post.mu[i]) <= 1e-6);

        post.log_var = {0.3, -0.4, 1.0};
        CHECK(sample_latent(post, std::vector<double>(3, 0.0)) == post.mu);

        check::Rng rng(6);
        const int n = 100000;
        std::vector<double> mean(3, 0.0);
        for (int s = 0; s < n; ++s) {
            const auto zs = sample_latent(post, check::random_normal(3, rng));
            for (int i = 0; i < 3; ++i)
                mean[i] += zs[i] / n;
        }
        for (int i = 0; i < 3; ++i) {
            const double sigma = std::exp(post.log_var[i] / 2);
            CHECK(std::abs(mean[i] - post.mu[i]) <= 4 * sigma / std::sqrt(double(n)));
        }
    }

    TEST_CASE("KL to the standard normal prior")
    {
        CHECK(kl_to_prior({{0.0, 0.0}, {0.0, 0.0}}) == 0.0);
        CHECK(kl_to_prior({{1.0}, {0.0}}) == doctest::Approx(0.5).epsilon(1e-14));
        const double half = kl_to_prior({{0.0}, {std::log(0.25)}});
        CHECK(half == doctest::Approx(0.5 * (0.25 - 1 - std::log(0.25))).epsilon(1e-14));
        CHECK(half == doctest::Approx(0.3181).epsilon(1e-4));

        check::Rng rng(7);
        for (int trial = 0; trial < 1000; ++trial) {
            EditorPosterior p{check::random_normal(4, rng, 2.0), check::random_normal(4, rng, 3.0)};
            CHECK(kl_to_prior(p) >= 0.0);
        }
    }

    TEST_CASE("filter gradients match finite differences")
    {
        check::Rng rng(8);
        const auto stats = check::filter_gradients(rng, 100);
        INFO(stats.first_failure);
        CHECK(stats.points >= 100);
        CHECK(stats.ok());
    }

    TEST_CASE("encoder gradients match finite differences")
    {
        check::Rng rng(9);
        const auto stats = check::encoder_gradients(rng, 100);
        INFO(stats.first_failure);
        CHECK(stats.points >= 100);
        CHECK(stats.ok());
    }
}
