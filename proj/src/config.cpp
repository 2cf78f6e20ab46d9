#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace typeclust {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ArgumentError("config: '" + where + "' must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ArgumentError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <class T>
void read(const json& obj, const char* key, T& dst, const std::string& where)
{
    if (!obj.contains(key))
        return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ArgumentError("config: bad value for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
    }
}

void read_model(const json& j, ModelConfig& m)
{
    reject_unknown(j,
                   {"variant", "K", "canvas", "bandwidth", "z_dim", "editor_channels", "editor_kernel",
                    "editor_hidden", "encoder_channels1", "encoder_channels2", "prior"},
                   "model");
    if (j.contains("variant")) {
        if (!j["variant"].is_string())
            throw ArgumentError("config: bad value for 'model.variant'");
        m.variant = parse_variant(j["variant"].get<std::string>());
    }
    read(j, "K", m.K, "model");
    read(j, "canvas", m.canvas, "model");
    read(j, "bandwidth", m.bandwidth, "model");
    read(j, "z_dim", m.editor.z_dim, "model");
    read(j, "editor_channels", m.editor.channels, "model");
    read(j, "editor_kernel", m.editor.kernel, "model");
    read(j, "editor_hidden", m.editor.hidden, "model");
    read(j, "encoder_channels1", m.encoder_channels1, "model");
    read(j, "encoder_channels2", m.encoder_channels2, "model");
    if (j.contains("prior")) {
        const json& p = j["prior"];
        reject_unknown(p, {"sigma_r", "sigma_o", "sigma_s", "sigma_a"}, "model.prior");
        read(p, "sigma_r", m.prior.sigma_r, "model.prior");
        read(p, "sigma_o", m.prior.sigma_o, "model.prior");
        read(p, "sigma_s", m.prior.sigma_s, "model.prior");
        read(p, "sigma_a", m.prior.sigma_a, "model.prior");
    }
}

void read_train(const json& j, TrainConfig& t)
{
    reject_unknown(j,
                   {"epochs", "batch_size", "learning_rate", "template_learning_rate", "lambda_learning_rate",
                    "kl_warmup_epochs", "binarize_threshold", "init_images", "init_noise", "init_clamp", "threads"},
                   "train");
    read(j, "epochs", t.epochs, "train");
    read(j, "batch_size", t.batch_size, "train");
    read(j, "learning_rate", t.learning_rate, "train");
    read(j, "template_learning_rate", t.template_learning_rate, "train");
    read(j, "lambda_learning_rate", t.lambda_learning_rate, "train");
    read(j, "kl_warmup_epochs", t.kl_warmup_epochs, "train");
    read(j, "binarize_threshold", t.binarize_threshold, "train");
    read(j, "init_images", t.init_images, "train");
    read(j, "init_noise", t.init_noise, "train");
    read(j, "init_clamp", t.init_clamp, "train");
    read(j, "threads", t.threads, "train");
}

void read_perturb(const json& j, PerturbConfig& p)
{
    reject_unknown(j,
                   {"offset_range", "rotation_range", "shear_range", "scale_range", "morph_kernel_sizes",
                    "noise_sigma", "examples_per_cast", "bandwidth"},
                   "perturb");
    read(j, "offset_range", p.offset_range, "perturb");
    read(j, "rotation_range", p.rotation_range, "perturb");
    read(j, "shear_range", p.shear_range, "perturb");
    read(j, "scale_range", p.scale_range, "perturb");
    read(j, "morph_kernel_sizes", p.morph_kernel_sizes, "perturb");
    read(j, "noise_sigma", p.noise_sigma, "perturb");
    read(j, "examples_per_cast", p.examples_per_cast, "perturb");
    read(j, "bandwidth", p.bandwidth, "perturb");
}

void read_eval(const json& j, EvalConfig& e)
{
    reject_unknown(j, {"nll_samples", "align_steps", "align_learning_rate", "grid_examples"}, "eval");
    read(j, "nll_samples", e.nll_samples, "eval");
    read(j, "align_steps", e.align_steps, "eval");
    read(j, "align_learning_rate", e.align_learning_rate, "eval");
    read(j, "grid_examples", e.grid_examples, "eval");
}

ordered_json model_json(const ModelConfig& m)
{
    ordered_json j;
    j["variant"] = to_string(m.variant);
    j["K"] = m.K;
    j["canvas"] = m.canvas;
    j["bandwidth"] = m.bandwidth;
    j["z_dim"] = m.editor.z_dim;
    j["editor_channels"] = m.editor.channels;
    j["editor_kernel"] = m.editor.kernel;
    j["editor_hidden"] = m.editor.hidden;
    j["encoder_channels1"] = m.encoder_channels1;
    j["encoder_channels2"] = m.encoder_channels2;
    j["prior"] = {{"sigma_r", m.prior.sigma_r},
                  {"sigma_o", m.prior.sigma_o},
                  {"sigma_s", m.prior.sigma_s},
                  {"sigma_a", m.prior.sigma_a}};
    return j;
}

// threads is excluded: results do not depend on it.
ordered_json train_json(const TrainConfig& t)
{
    ordered_json j;
    j["epochs"] = t.epochs;
    j["batch_size"] = t.batch_size;
    j["learning_rate"] = t.learning_rate;
    j["template_learning_rate"] = t.template_learning_rate;
    j["lambda_learning_rate"] = t.lambda_learning_rate;
    j["kl_warmup_epochs"] = t.kl_warmup_epochs;
    j["binarize_threshold"] = t.binarize_threshold;
    j["init_images"] = t.init_images;
    j["init_noise"] = t.init_noise;
    j["init_clamp"] = t.init_clamp;
    return j;
}

} // namespace

void EvalConfig::validate() const
{
    if (nll_samples < 1)
        throw ArgumentError("eval.nll_samples must be >= 1");
    if (align_steps < 0)
        throw ArgumentError("eval.align_steps must be >= 0");
    if (!(align_learning_rate > 0))
        throw ArgumentError("eval.align_learning_rate must be > 0");
    if (grid_examples < 1)
        throw ArgumentError("eval.grid_examples must be >= 1");
}

void RunConfig::validate() const
{
    train.validate();
    perturb.validate();
    eval.validate();
}

RunConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ArgumentError(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown(j, {"seed", "classes", "data", "out", "checkpoint", "model", "train", "perturb", "eval"}, "");
    RunConfig cfg;
    read(j, "seed", cfg.seed, "");
    read(j, "classes", cfg.classes, "");
    std::string path;
    if (j.contains("data")) {
        read(j, "data", path, "");
        cfg.data = path;
    }
    if (j.contains("out")) {
        read(j, "out", path, "");
        cfg.out = path;
    }
    if (j.contains("checkpoint")) {
        read(j, "checkpoint", path, "");
        cfg.checkpoint = path;
    }
    if (j.contains("model"))
        read_model(j["model"], cfg.train.model);
    if (j.contains("train"))
        read_train(j["train"], cfg.train);
    if (j.contains("perturb"))
        read_perturb(j["perturb"], cfg.perturb);
    if (j.contains("eval"))
        read_eval(j["eval"], cfg.eval);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config(ss.str());
    // relative paths in the file are relative to the file itself
    const auto base = path.parent_path();
    for (auto* p : {&cfg.data, &cfg.out, &cfg.checkpoint})
        if (!p->empty() && p->is_relative())
            *p = base / *p;
    return cfg;
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& o)
{
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.variant)
        cfg.train.model.variant = parse_variant(*o.variant);
    if (o.K)
        cfg.train.model.K = *o.K;
    if (o.out)
        cfg.out = *o.out;
    if (o.checkpoint)
        cfg.checkpoint = *o.checkpoint;
    if (o.data)
        cfg.data = *o.data;
    cfg.validate();
}

std::string model_config_json(const TrainConfig& cfg)
{
    ordered_json j;
    j["model"] = model_json(cfg.model);
    j["train"] = train_json(cfg);
    return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid model configuration: ") + e.what());
    }
    reject_unknown(j, {"model", "train"}, "");
    TrainConfig t;
    if (j.contains("model"))
        read_model(j["model"], t.model);
    if (j.contains("train"))
        read_train(j["train"], t);
    return t;
}

std::uint64_t class_seed(std::uint64_t seed, const std::string& char_class)
{
    return derive_seed(seed, "train:" + char_class, 0);
}

} // namespace typeclust
