#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metrics.hpp"
#include "mixture.hpp"

namespace typeclust {

std::vector<int> assign_all(std::span<const std::vector<double>> xs, const MixtureState& state,
                            const LambdaTable& lambdas);

// Mean per-example upper bound on the negative log-likelihood.
//  - ocular: exact discrete marginal.
//  - lambda_only: bound maximized over the spatial latents (the table rows).
//  - encoder variants: negative ELBO, with each component's expectation
//    estimated from `samples` draws of z seeded from `seed`.
double nll_bound(std::span<const std::vector<double>> xs, const MixtureState& state, const LambdaTable& lambdas,
                 int samples = 8, std::uint64_t seed = 0);

struct ClassReport {
    std::string char_class;
    std::size_t examples = 0;
    std::optional<ClusterScores> scores; // absent without ground truth
    double nll_bound = 0;
};

struct Report {
    std::string variant;
    int K = 0;
    std::vector<ClassReport> per_class;
    std::optional<ClusterScores> macro; // arithmetic mean over classes with truth
    double nll_bound = 0;               // arithmetic mean over classes

    std::string to_json() const; // keys: v_measure, mutual_info, fowlkes_mallows, nll_bound, per_class, variant, K
};

// Fills macro averages from per_class entries.
void finalize_report(Report& r);

} // namespace typeclust
