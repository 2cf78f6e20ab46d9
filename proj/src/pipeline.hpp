#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "evaluate.hpp"
#include "synth.hpp"

namespace typeclust {

// Workflows behind the command-line tool. Each reads everything it needs
// from the RunConfig and writes under cfg.out.

// Classes to synthesize: cfg.classes, or every built-in class.
std::vector<std::string> synth_classes(const RunConfig& cfg);
SyntheticCorpus synthesize_class(const RunConfig& cfg, const std::string& char_class);

struct SynthOutput {
    std::filesystem::path manifest;
    std::filesystem::path truth;
    std::size_t examples = 0;
};
// out/manifest.jsonl, out/truth.jsonl, out/images/*.pgm
SynthOutput run_synth(const RunConfig& cfg);

// cfg.data filtered to cfg.classes (all classes when empty).
std::vector<GlyphImage> load_run_dataset(const RunConfig& cfg);

using ClassProgressFn = std::function<void(const std::string& char_class, const EpochLog&)>;

// Fits one mixture per class; the training seed of each class derives from cfg.seed.
Checkpoint train_dataset(const std::vector<GlyphImage>& dataset, const RunConfig& cfg,
                         std::map<std::string, std::vector<EpochLog>>* traces = nullptr,
                         const ClassProgressFn& progress = {});

std::filesystem::path checkpoint_path(const RunConfig& cfg); // cfg.checkpoint or out/model.json

// Checkpoint at checkpoint_path(cfg), plus out/loss_<class>.csv (epoch,objective,kl_weight).
std::filesystem::path run_train(const RunConfig& cfg, const ClassProgressFn& progress = {});

// Stored lambda rows when the images are the ones the class was trained on,
// otherwise rows refit against the frozen model.
LambdaTable lambdas_for(const ClassModel& model, std::span<const std::vector<double>> xs, const EvalConfig& eval);

Report evaluate_dataset(const Checkpoint& ck, const std::vector<GlyphImage>& dataset, const RunConfig& cfg);
std::filesystem::path run_eval(const RunConfig& cfg);   // out/metrics.json
std::filesystem::path run_assign(const RunConfig& cfg); // out/assignments.csv

struct AlignStats {
    double unaligned_variance = 0; // mean per-pixel variance of the binarized input stack
    double aligned_variance = 0;   // same for the inverse-warped, re-binarized stack
};
// Aligns every image with the lambda of its assigned component.
std::vector<GlyphImage> align_class(const ClassModel& model, const std::vector<GlyphImage>& images,
                                    const RunConfig& cfg);
// out/aligned/<class>_<idx>.pgm, out/<class>_unaligned_mean.png, out/<class>_aligned_mean.png
std::map<std::string, AlignStats> run_align(const RunConfig& cfg);

// out/templates_<class>.png: one row of template probabilities.
// out/examples_<class>.png: per component, rows of inputs, warped templates and edited templates.
std::vector<std::filesystem::path> run_export_templates(const RunConfig& cfg);

} // namespace typeclust
