#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synth.hpp"
#include "trainer.hpp"

namespace typeclust {

// Configuration for every workflow, loaded from one JSON file. Every key is
// optional; unknown keys are rejected.
//
// {
//   "seed": 0,
//   "classes": ["A", "F"],
//   "data": "corpus/manifest.jsonl",
//   "out": "run",
//   "checkpoint": "run/model.json",
//   "model":   { "variant", "K", "canvas", "bandwidth", "z_dim", "editor_channels", "editor_kernel",
//                "editor_hidden", "encoder_channels1", "encoder_channels2",
//                "prior": { "sigma_r", "sigma_o", "sigma_s", "sigma_a" } },
//   "train":   { "epochs", "batch_size", "learning_rate", "template_learning_rate",
//                "lambda_learning_rate", "kl_warmup_epochs", "binarize_threshold", "init_images",
//                "init_noise", "init_clamp", "threads" },
//   "perturb": { "offset_range", "rotation_range", "shear_range", "scale_range",
//                "morph_kernel_sizes", "noise_sigma", "examples_per_cast", "bandwidth" },
//   "eval":    { "nll_samples", "align_steps", "align_learning_rate", "grid_examples" }
// }
struct EvalConfig {
    int nll_samples = 8;              // z draws per component for the ELBO-based bound
    int align_steps = 100;            // lambda refits for images without a stored table
    double align_learning_rate = 0.05;
    int grid_examples = 8;            // examples per component in exported grids

    void validate() const;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::vector<std::string> classes; // empty: every class found (or every built-in class for synth)
    std::filesystem::path data;       // dataset manifest
    std::filesystem::path out = ".";
    std::filesystem::path checkpoint;
    TrainConfig train;
    PerturbConfig perturb;
    EvalConfig eval;

    void validate() const; // throws ArgumentError
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<int> K;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::filesystem::path> data;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path); // IoError, ArgumentError
void apply_overrides(RunConfig& cfg, const ConfigOverrides& o);

// Canonical JSON of the model and training sections; stable key order.
std::string model_config_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& json_text);

// Training seed for one class, derived from the run seed.
std::uint64_t class_seed(std::uint64_t seed, const std::string& char_class);

} // namespace typeclust
