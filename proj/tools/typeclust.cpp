#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "typeclust/typeclust.h"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<int> k;
    std::optional<std::string> out;
    std::optional<std::string> checkpoint;
    std::optional<std::string> data;
};

using Runner = tc_status (*)(const tc_config*, tc_log_fn, void*);

void add_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Seed for all randomness");
    cmd->add_option("--variant", f.variant, "Model variant")
        ->check(CLI::IsMember({"full", "no_residual", "vae_only", "lambda_only", "ocular"}));
    cmd->add_option("--k", f.k, "Number of mixture components")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint path (default OUT/model.json)");
    cmd->add_option("--data", f.data, "Dataset manifest (JSON Lines)");
}

void print_line(const char* line, void*)
{
    std::printf("%s\n", line);
    std::fflush(stdout);
}

int report_failure(const char* cmd, tc_status s)
{
    std::fprintf(stderr, "typeclust %s: %s: %s\n", cmd, tc_status_name(s), tc_last_error());
    return 1;
}

int run(const std::string& name, const Flags& f, Runner runner)
{
    tc_config* cfg = nullptr;
    tc_status s = f.config.empty() ? tc_config_new(&cfg) : tc_config_load(f.config.c_str(), &cfg);
    if (s != TC_OK)
        return report_failure(name.c_str(), s);
    if (s == TC_OK && f.seed)
        s = tc_config_set_seed(cfg, *f.seed);
    if (s == TC_OK && f.variant)
        s = tc_config_set_variant(cfg, f.variant->c_str());
    if (s == TC_OK && f.k)
        s = tc_config_set_k(cfg, *f.k);
    if (s == TC_OK && f.out)
        s = tc_config_set_out(cfg, f.out->c_str());
    if (s == TC_OK && f.checkpoint)
        s = tc_config_set_checkpoint(cfg, f.checkpoint->c_str());
    if (s == TC_OK && f.data)
        s = tc_config_set_data(cfg, f.data->c_str());
    if (s == TC_OK)
        s = runner(cfg, print_line, nullptr);
    tc_config_free(cfg);
    return s == TC_OK ? 0 : report_failure(name.c_str(), s);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Unsupervised typeface clustering with interpretable spatial latents"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tc_version());

    struct Command {
        const char* name;
        const char* help;
        Runner runner;
    };
    const Command commands[] = {
        {"synth", "Generate a synthetic corpus, manifest and truth file", tc_run_synth},
        {"train", "Fit one mixture per class; write checkpoint and loss CSVs", tc_run_train},
        {"eval", "Write clustering metrics and NLL bounds as JSON", tc_run_eval},
        {"assign", "Write per-image cluster ids as CSV", tc_run_assign},
        {"align", "Write aligned images and unaligned/aligned average images", tc_run_align},
        {"export-templates", "Write template and warped/edited template grids", tc_run_export_templates},
    };
    Flags flags;
    for (const auto& c : commands)
        add_flags(app.add_subcommand(c.name, c.help), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "typeclust: " << e.what() << "\n\n";
        CLI::App* shown = &app;
        for (auto* sub : app.get_subcommands())
            shown = sub;
        std::cerr << shown->help();
        return 2;
    }
    for (const auto& c : commands)
        if (app.got_subcommand(c.name))
            return run(c.name, flags, c.runner);
    std::cerr << app.help();
    return 2;
}
