#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "errors.hpp"

namespace typeclust {

namespace {

std::map<int, int> dense_index(std::span<const int> labels)
{
    std::map<int, int> idx;
    for (int l : labels)
        idx.emplace(l, 0);
    int next = 0;
    for (auto& [label, i] : idx)
        i = next++;
    return idx;
}

double entropy(const std::vector<std::int64_t>& sums, std::int64_t n)
{
    double h = 0;
    for (auto c : sums)
        if (c > 0) {
            double p = double(c) / double(n);
            h -= p * std::log(p);
        }
    return h;
}

// H(rows | cols) when by_cols, else H(cols | rows).
double conditional_entropy(const ContingencyTable& t, bool rows_given_cols)
{
    auto given = rows_given_cols ? t.col_sums() : t.row_sums();
    double h = 0;
    const double n = double(t.n);
    for (int a = 0; a < t.rows; ++a)
        for (int b = 0; b < t.cols; ++b) {
            auto c = t.at(a, b);
            if (c == 0)
                continue;
            double marg = double(rows_given_cols ? given[b] : given[a]);
            h -= (double(c) / n) * std::log(double(c) / marg);
        }
    return h;
}

double pairs(std::int64_t c) { return 0.5 * double(c) * double(c - 1); }

} // namespace

std::vector<std::int64_t> ContingencyTable::row_sums() const
{
    std::vector<std::int64_t> s(rows, 0);
    for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b)
            s[a] += at(a, b);
    return s;
}

std::vector<std::int64_t> ContingencyTable::col_sums() const
{
    std::vector<std::int64_t> s(cols, 0);
    for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b)
            s[b] += at(a, b);
    return s;
}

ContingencyTable contingency(std::span<const int> true_labels, std::span<const int> pred_labels)
{
    if (true_labels.size() != pred_labels.size())
        throw ArgumentError("contingency: label lists differ in length");
    if (true_labels.empty())
        throw ArgumentError("contingency: empty labeling");
    auto ti = dense_index(true_labels);
    auto pi = dense_index(pred_labels);
    ContingencyTable t;
    t.rows = int(ti.size());
    t.cols = int(pi.size());
    t.counts.assign(std::size_t(t.rows) * t.cols, 0);
    for (std::size_t d = 0; d < true_labels.size(); ++d)
        ++t.counts[std::size_t(ti[true_labels[d]]) * t.cols + pi[pred_labels[d]]];
    t.n = std::int64_t(true_labels.size());
    return t;
}

double mutual_info(const ContingencyTable& t)
{
    auto rs = t.row_sums();
    auto cs = t.col_sums();
    const double n = double(t.n);
    double mi = 0;
    for (int a = 0; a < t.rows; ++a)
        for (int b = 0; b < t.cols; ++b) {
            auto c = t.at(a, b);
            if (c == 0)
                continue;
            mi += (double(c) / n) * std::log(double(c) * n / (double(rs[a]) * double(cs[b])));
        }
    return std::max(mi, 0.0);
}

double homogeneity(const ContingencyTable& t)
{
    double h_true = entropy(t.row_sums(), t.n);
    if (h_true == 0.0)
        return 1.0;
    return 1.0 - conditional_entropy(t, true) / h_true;
}

double completeness(const ContingencyTable& t)
{
    double h_pred = entropy(t.col_sums(), t.n);
    if (h_pred == 0.0)
        return 1.0;
    return 1.0 - conditional_entropy(t, false) / h_pred;
}

double v_measure(const ContingencyTable& t)
{
    double h = homogeneity(t);
    double c = completeness(t);
    if (h + c == 0.0)
        return 0.0;
    return std::clamp(2.0 * h * c / (h + c), 0.0, 1.0);
}

double fowlkes_mallows(const ContingencyTable& t)
{
    double tp = 0;
    for (auto c : t.counts)
        tp += pairs(c);
    double same_pred = 0, same_true = 0;
    for (auto c : t.col_sums())
        same_pred += pairs(c);
    for (auto c : t.row_sums())
        same_true += pairs(c);
    if (same_pred == 0.0 || same_true == 0.0)
        return 0.0;
    return tp / std::sqrt(same_pred * same_true);
}

ClusterScores score_clustering(std::span<const int> true_labels, std::span<const int> pred_labels)
{
    auto t = contingency(true_labels, pred_labels);
    return {v_measure(t), mutual_info(t), fowlkes_mallows(t)};
}

} // namespace typeclust
