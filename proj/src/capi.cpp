#include "typeclust/typeclust.h"

#include <exception>
#include <new>
#include <string>

#include "checkpoint.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "pipeline.hpp"

using namespace typeclust;

struct tc_config {
    RunConfig cfg;
};

struct tc_checkpoint {
    Checkpoint ck;
    std::string variant;
};

namespace {

thread_local std::string g_last_error;

tc_status fail(tc_status s, const std::string& msg)
{
    g_last_error = msg;
    return s;
}

template <class F>
tc_status guarded(F&& f)
{
    try {
        g_last_error.clear();
        f();
        return TC_OK;
    } catch (const ArgumentError& e) {
        return fail(TC_ERR_ARGUMENT, e.what());
    } catch (const IoError& e) {
        return fail(TC_ERR_IO, e.what());
    } catch (const FormatError& e) {
        return fail(TC_ERR_FORMAT, e.what());
    } catch (const TrainingError& e) {
        return fail(TC_ERR_TRAINING, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(TC_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(TC_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TC_ERR_INTERNAL, e.what());
    }
}

void emit(tc_log_fn log, void* user, const std::string& line)
{
    if (log)
        log(line.c_str(), user);
}

void require(const void* p, const char* what)
{
    if (!p)
        throw ArgumentError(std::string(what) + " is null");
}

} // namespace

extern "C" {

const char* tc_last_error(void)
{
    return g_last_error.c_str();
}

const char* tc_status_name(tc_status status)
{
    switch (status) {
    case TC_OK: return "ok";
    case TC_ERR_ARGUMENT: return "argument error";
    case TC_ERR_IO: return "i/o error";
    case TC_ERR_FORMAT: return "format error";
    case TC_ERR_TRAINING: return "training error";
    case TC_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* tc_version(void)
{
    return "1.0.0";
}

tc_status tc_config_new(tc_config** out)
{
    return guarded([&] {
        require(out, "out");
        *out = new tc_config{};
    });
}

tc_status tc_config_load(const char* path, tc_config** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new tc_config{load_config(path)};
    });
}

tc_status tc_config_parse(const char* json, tc_config** out)
{
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new tc_config{parse_config(json)};
    });
}

void tc_config_free(tc_config* cfg)
{
    delete cfg;
}

tc_status tc_config_set_seed(tc_config* cfg, uint64_t seed)
{
    return guarded([&] {
        require(cfg, "config");
        apply_overrides(cfg->cfg, {.seed = seed});
    });
}

tc_status tc_config_set_variant(tc_config* cfg, const char* variant)
{
    return guarded([&] {
        require(cfg, "config");
        require(variant, "variant");
        apply_overrides(cfg->cfg, {.variant = std::string(variant)});
    });
}

tc_status tc_config_set_k(tc_config* cfg, int k)
{
    return guarded([&] {
        require(cfg, "config");
        apply_overrides(cfg->cfg, {.K = k});
    });
}

tc_status tc_config_set_out(tc_config* cfg, const char* dir)
{
    return guarded([&] {
        require(cfg, "config");
        require(dir, "dir");
        apply_overrides(cfg->cfg, {.out = std::filesystem::path(dir)});
    });
}

tc_status tc_config_set_checkpoint(tc_config* cfg, const char* path)
{
    return guarded([&] {
        require(cfg, "config");
        require(path, "path");
        apply_overrides(cfg->cfg, {.checkpoint = std::filesystem::path(path)});
    });
}

tc_status tc_config_set_data(tc_config* cfg, const char* manifest_path)
{
    return guarded([&] {
        require(cfg, "config");
        require(manifest_path, "manifest_path");
        apply_overrides(cfg->cfg, {.data = std::filesystem::path(manifest_path)});
    });
}

tc_status tc_run_synth(const tc_config* cfg, tc_log_fn log, void* user)
{
    return guarded([&] {
        require(cfg, "config");
        const SynthOutput out = run_synth(cfg->cfg);
        emit(log, user, "wrote " + std::to_string(out.examples) + " examples to " + out.manifest.string());
        emit(log, user, "wrote " + out.truth.string());
    });
}

tc_status tc_run_train(const tc_config* cfg, tc_log_fn log, void* user)
{
    return guarded([&] {
        require(cfg, "config");
        ClassProgressFn progress;
        if (log)
            progress = [&](const std::string& cls, const EpochLog& l) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "class %s epoch %d objective %.4f kl_weight %.3f", cls.c_str(),
                              l.epoch, l.objective, l.kl_weight);
                emit(log, user, buf);
            };
        const auto path = run_train(cfg->cfg, progress);
        emit(log, user, "wrote " + path.string());
    });
}

tc_status tc_run_eval(const tc_config* cfg, tc_log_fn log, void* user)
{
    return guarded([&] {
        require(cfg, "config");
        emit(log, user, "wrote " + run_eval(cfg->cfg).string());
    });
}

tc_status tc_run_assign(const tc_config* cfg, tc_log_fn log, void* user)
{
    return guarded([&] {
        require(cfg, "config");
        emit(log, user, "wrote " + run_assign(cfg->cfg).string());
    });
}

tc_status tc_run_align(const tc_config* cfg, tc_log_fn log, void* user)
{
    return guarded([&] {
        require(cfg, "config");
        for (const auto& [cls, s] : run_align(cfg->cfg)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "class %s stack variance unaligned %.5f aligned %.5f", cls.c_str(),
                          s.unaligned_variance, s.aligned_variance);
            emit(log, user, buf);
        }
        emit(log, user, "wrote " + (cfg->cfg.out / "alignment.csv").string());
    });
}

tc_status tc_run_export_templates(const tc_config* cfg, tc_log_fn log, void* user)
{
    return guarded([&] {
        require(cfg, "config");
        for (const auto& p : run_export_templates(cfg->cfg))
            emit(log, user, "wrote " + p.string());
    });
}

tc_status tc_checkpoint_load(const char* path, tc_checkpoint** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        Checkpoint ck = load_checkpoint(path);
        const std::string variant = to_string(ck.config.model.variant);
        *out = new tc_checkpoint{std::move(ck), variant};
    });
}

void tc_checkpoint_free(tc_checkpoint* ck)
{
    delete ck;
}

int tc_checkpoint_k(const tc_checkpoint* ck)
{
    return ck ? ck->ck.config.model.K : 0;
}

int tc_checkpoint_canvas(const tc_checkpoint* ck)
{
    return ck ? ck->ck.config.model.canvas : 0;
}

const char* tc_checkpoint_variant(const tc_checkpoint* ck)
{
    return ck ? ck->variant.c_str() : "";
}

size_t tc_checkpoint_class_count(const tc_checkpoint* ck)
{
    return ck ? ck->ck.classes.size() : 0;
}

const char* tc_checkpoint_class_name(const tc_checkpoint* ck, size_t index)
{
    if (!ck || index >= ck->ck.classes.size())
        return nullptr;
    return ck->ck.classes[index].char_class.c_str();
}

tc_status tc_checkpoint_template(const tc_checkpoint* ck, size_t class_index, int k, double* buf, size_t len)
{
    return guarded([&] {
        require(ck, "checkpoint");
        require(buf, "buf");
        if (class_index >= ck->ck.classes.size())
            throw ArgumentError("class index out of range");
        const auto& state = ck->ck.classes[class_index].state;
        if (k < 0 || k >= state.K())
            throw ArgumentError("component index out of range");
        const auto probs = state.template_probs(k);
        if (len < probs.size())
            throw ArgumentError("buffer too small: need " + std::to_string(probs.size()) + " values");
        std::copy(probs.begin(), probs.end(), buf);
    });
}

tc_status tc_checkpoint_weights(const tc_checkpoint* ck, size_t class_index, double* buf, size_t len)
{
    return guarded([&] {
        require(ck, "checkpoint");
        require(buf, "buf");
        if (class_index >= ck->ck.classes.size())
            throw ArgumentError("class index out of range");
        const auto w = ck->ck.classes[class_index].state.mixing_weights();
        if (len < w.size())
            throw ArgumentError("buffer too small: need " + std::to_string(w.size()) + " values");
        std::copy(w.begin(), w.end(), buf);
    });
}

} // extern "C"
