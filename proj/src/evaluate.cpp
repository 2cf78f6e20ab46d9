#include "evaluate.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "errors.hpp"
#include "ocular.hpp"
#include "synth.hpp"

namespace typeclust {

std::vector<int> assign_all(std::span<const std::vector<double>> xs, const MixtureState& state,
                            const LambdaTable& lambdas)
{
    std::vector<int> out(xs.size());
    const bool rows = lambdas.examples() == xs.size() && lambdas.K == state.K();
    for (std::size_t d = 0; d < xs.size(); ++d)
        out[d] = assign_cluster(xs[d], state, rows ? lambdas.row(d) : std::span<const SpatialParams>{});
    return out;
}

double nll_bound(std::span<const std::vector<double>> xs, const MixtureState& state, const LambdaTable& lambdas,
                 int samples, std::uint64_t seed)
{
    if (xs.empty())
        throw ArgumentError("nll_bound: empty dataset");
    const int K = state.K();
    const bool rows = lambdas.examples() == xs.size() && lambdas.K == K;
    const auto log_pi = state.log_mixing_weights();
    const int zd = state.cfg.editor.z_dim;
    double total = 0;
    for (std::size_t d = 0; d < xs.size(); ++d) {
        if (state.cfg.variant == Variant::ocular) {
            total -= ocular_loglik(xs[d], state);
            continue;
        }
        std::vector<double> scores(K);
        for (int k = 0; k < K; ++k) {
            const SpatialParams lambda = rows ? lambdas.at(d, k) : SpatialParams{};
            if (!state.uses_editor()) {
                scores[k] = log_pi[k] + component_elbo(xs[d], k, lambda, state, {});
                continue;
            }
            std::mt19937_64 rng(derive_seed(seed, "nll", d * std::uint64_t(K) + std::uint64_t(k)));
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<double> noise(zd);
            double acc = 0;
            for (int s = 0; s < samples; ++s) {
                for (double& e : noise)
                    e = normal(rng);
                acc += component_elbo(xs[d], k, lambda, state, noise);
            }
            scores[k] = log_pi[k] + acc / samples;
        }
        total -= log_sum_exp(scores);
    }
    return total / double(xs.size());
}

void finalize_report(Report& r)
{
    double nll = 0;
    ClusterScores sum;
    int with_truth = 0;
    for (const auto& c : r.per_class) {
        nll += c.nll_bound;
        if (c.scores) {
            sum.v_measure += c.scores->v_measure;
            sum.mutual_info += c.scores->mutual_info;
            sum.fowlkes_mallows += c.scores->fowlkes_mallows;
            ++with_truth;
        }
    }
    r.nll_bound = r.per_class.empty() ? 0.0 : nll / double(r.per_class.size());
    if (with_truth > 0)
        r.macro = ClusterScores{sum.v_measure / with_truth, sum.mutual_info / with_truth,
                                sum.fowlkes_mallows / with_truth};
    else
        r.macro.reset();
}

std::string Report::to_json() const
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["variant"] = variant;
    j["K"] = K;
    if (macro) {
        j["v_measure"] = macro->v_measure;
        j["mutual_info"] = macro->mutual_info;
        j["fowlkes_mallows"] = macro->fowlkes_mallows;
    }
    j["nll_bound"] = nll_bound;
    ordered_json pc = ordered_json::object();
    for (const auto& c : per_class) {
        ordered_json e;
        e["examples"] = c.examples;
        if (c.scores) {
            e["v_measure"] = c.scores->v_measure;
            e["mutual_info"] = c.scores->mutual_info;
            e["fowlkes_mallows"] = c.scores->fowlkes_mallows;
        }
        e["nll_bound"] = c.nll_bound;
        pc[c.char_class] = e;
    }
    j["per_class"] = pc;
    return j.dump(2);
}

} // namespace typeclust
