#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace typeclust {

// counts[a * cols + b] = number of items with true class a and predicted cluster b.
// Rows/columns index the sorted distinct labels of each labeling.
struct ContingencyTable {
    int rows = 0;
    int cols = 0;
    std::vector<std::int64_t> counts;
    std::int64_t n = 0;

    std::int64_t at(int a, int b) const { return counts[std::size_t(a) * cols + b]; }
    std::vector<std::int64_t> row_sums() const;
    std::vector<std::int64_t> col_sums() const;
};

ContingencyTable contingency(std::span<const int> true_labels, std::span<const int> pred_labels);

// All entropies and information in nats.
double mutual_info(const ContingencyTable& t);
double homogeneity(const ContingencyTable& t);
double completeness(const ContingencyTable& t);
double v_measure(const ContingencyTable& t);
double fowlkes_mallows(const ContingencyTable& t);

struct ClusterScores {
    double v_measure = 0;
    double mutual_info = 0;
    double fowlkes_mallows = 0;
};

ClusterScores score_clustering(std::span<const int> true_labels, std::span<const int> pred_labels);

} // namespace typeclust
