#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "checkpoint.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "evaluate.hpp"
#include "pipeline.hpp"

using namespace typeclust;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("typeclust_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Tiny but complete run: two classes, 10 examples per cast, 16 px canvas.
RunConfig tiny_run(const fs::path& dir, Variant v = Variant::full)
{
    RunConfig cfg = parse_config(R"({
      "seed": 3, "classes": ["E", "H"],
      "model": {"K": 3, "canvas": 16, "z_dim": 4, "editor_channels": 3, "editor_hidden": 8,
                "encoder_channels1": 3, "encoder_channels2": 4},
      "train": {"epochs": 2, "batch_size": 8, "kl_warmup_epochs": 1, "threads": 2},
      "perturb": {"examples_per_cast": 10},
      "eval": {"nll_samples": 2, "align_steps": 5, "grid_examples": 2}
    })");
    cfg.train.model.variant = v;
    cfg.out = dir;
    cfg.data = dir / "manifest.jsonl";
    return cfg;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("config parsing, validation and overrides")
    {
        const auto cfg = parse_config(R"({"seed": 9, "model": {"variant": "ocular", "K": 4, "prior": {"sigma_o": 2.0}},
                                          "train": {"epochs": 7}, "perturb": {"morph_kernel_sizes": [1, 5]}})");
        CHECK(cfg.seed == 9);
        CHECK(cfg.train.model.variant == Variant::ocular);
        CHECK(cfg.train.model.K == 4);
        CHECK(cfg.train.model.prior.sigma_o == 2.0);
        CHECK(cfg.train.epochs == 7);
        CHECK(cfg.perturb.morph_kernel_sizes == std::vector<int>{1, 5});
        CHECK(cfg.train.batch_size == TrainConfig{}.batch_size);

        CHECK_THROWS_AS(parse_config(R"({"sead": 1})"), ArgumentError);
        CHECK_THROWS_AS(parse_config(R"({"model": {"kay": 3}})"), ArgumentError);
        CHECK_THROWS_AS(parse_config(R"({"model": {"prior": {"sigma_q": 1}}})"), ArgumentError);
        CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": 0}})"), ArgumentError);
        CHECK_THROWS_AS(parse_config(R"({"model": {"variant": "vae"}})"), ArgumentError);
        CHECK_THROWS_AS(parse_config(R"({"perturb": {"morph_kernel_sizes": [2]}})"), ArgumentError);
        CHECK_THROWS_AS(parse_config("{not json"), ArgumentError);

        auto over = cfg;
        ConfigOverrides o;
        o.seed = 11;
        o.variant = "lambda_only";
        o.K = 2;
        o.out = "elsewhere";
        apply_overrides(over, o);
        CHECK(over.seed == 11);
        CHECK(over.train.model.variant == Variant::lambda_only);
        CHECK(over.train.model.K == 2);
        CHECK(over.out == fs::path("elsewhere"));
        o = {};
        o.K = 0;
        CHECK_THROWS_AS(apply_overrides(over, o), ArgumentError);

        const auto dir = fresh_dir("config");
        std::ofstream(dir / "run.json") << R"({"data": "corpus/manifest.jsonl", "out": "result"})";
        const auto loaded = load_config(dir / "run.json");
        CHECK(loaded.data == dir / "corpus/manifest.jsonl");
        CHECK(loaded.out == dir / "result");
        CHECK_THROWS_AS(load_config(dir / "absent.json"), IoError);

        const auto canon = model_config_json(cfg.train);
        CHECK(model_config_json(train_config_from_json(canon)) == canon);
        CHECK(class_seed(1, "A") != class_seed(1, "B"));
        CHECK(class_seed(1, "A") == class_seed(1, "A"));
    }

    TEST_CASE("checkpoint round trip and validation")
    {
        const auto dir = fresh_dir("checkpoint");
        auto cfg = tiny_run(dir);
        cfg.train.epochs = 1;
        const auto data = select_class(synthesize_class(cfg, "E").images, "E");
        const auto ck = train_dataset(data, cfg);
        REQUIRE(ck.classes.size() == 1);
        save_checkpoint(ck, dir / "model.json");
        const auto back = load_checkpoint(dir / "model.json");
        CHECK(checkpoint_to_json(back) == checkpoint_to_json(ck));
        CHECK(back.config_hash() == ck.config_hash());
        REQUIRE(back.find("E") != nullptr);
        CHECK(back.find("Q") == nullptr);
        const auto a = back.find("E")->state.tensors(), b = ck.classes[0].state.tensors();
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(std::equal(a[i].begin(), a[i].end(), b[i].begin(), b[i].end()));
        CHECK(back.classes[0].lambdas.rows == ck.classes[0].lambdas.rows);

        auto j = nlohmann::json::parse(checkpoint_to_json(ck));
        j["config_hash"] = "0000000000000000";
        CHECK_THROWS_AS(checkpoint_from_json(j.dump()), FormatError);
        j = nlohmann::json::parse(checkpoint_to_json(ck));
        j["format_version"] = 99;
        CHECK_THROWS_AS(checkpoint_from_json(j.dump()), FormatError);
        j = nlohmann::json::parse(checkpoint_to_json(ck));
        j["classes"][0]["parameters"][0].erase(0);
        CHECK_THROWS_AS(checkpoint_from_json(j.dump()), FormatError);
        CHECK_THROWS_AS(checkpoint_from_json("[]"), FormatError);
        CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), IoError);
    }

    TEST_CASE("synth, train, eval, assign, align and export")
    {
        const auto dir = fresh_dir("pipeline");
        auto cfg = tiny_run(dir);
        const auto synth = run_synth(cfg);
        CHECK(synth.examples == 60);
        const auto manifest = read_manifest(synth.manifest);
        CHECK(manifest.entries.size() == 60);
        CHECK(fs::exists(synth.truth));

        std::vector<std::string> lines;
        const auto ckpt = run_train(cfg, [&](const std::string& cls, const EpochLog& log) {
            lines.push_back(cls + std::to_string(log.epoch));
        });
        CHECK(lines == std::vector<std::string>{"E0", "E1", "H0", "H1"});
        CHECK(ckpt == dir / "model.json");
        const auto csv = slurp(dir / "loss_E.csv");
        CHECK(csv.rfind("epoch,objective,kl_weight\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

        const auto metrics = nlohmann::json::parse(slurp(run_eval(cfg)));
        for (const char* key : {"variant", "K", "v_measure", "mutual_info", "fowlkes_mallows", "nll_bound", "per_class"})
            CHECK(metrics.contains(key));
        CHECK(metrics["per_class"].size() == 2);
        const double macro_v = (metrics["per_class"]["E"]["v_measure"].get<double>() +
                                metrics["per_class"]["H"]["v_measure"].get<double>()) / 2;
        CHECK(metrics["v_measure"].get<double>() == doctest::Approx(macro_v).epsilon(1e-12));

        const auto assign = slurp(run_assign(cfg));
        CHECK(assign.rfind("index,char_class,pred,true\n", 0) == 0);
        CHECK(std::count(assign.begin(), assign.end(), '\n') == 61);

        const auto stats = run_align(cfg);
        CHECK(stats.size() == 2);
        CHECK(fs::exists(dir / "E_aligned_mean.png"));
        CHECK(fs::exists(dir / "H_unaligned_mean.png"));
        const auto files = run_export_templates(cfg);
        CHECK(files.size() == 4);
        for (const auto& f : files)
            CHECK(fs::exists(f));

        // evaluation reads the model shape from the checkpoint, not the run config
        auto other = cfg;
        other.train.model.K = 2;
        CHECK(nlohmann::json::parse(slurp(run_eval(other)))["K"] == 3);

        auto missing = cfg;
        missing.checkpoint = dir / "absent.json";
        CHECK_THROWS_AS(run_eval(missing), IoError);

        // classes without a trained model are an error, not a silent skip
        RunConfig extra = cfg;
        extra.classes = {"N"};
        extra.out = dir / "extra";
        extra.data = dir / "extra" / "manifest.jsonl";
        run_synth(extra);
        extra.checkpoint = ckpt;
        CHECK_THROWS_AS(run_eval(extra), ArgumentError);
    }

    TEST_CASE("report bookkeeping")
    {
        Report r;
        r.variant = "full";
        r.K = 3;
        r.per_class = {{"A", 10, ClusterScores{0.2, 0.3, 0.4}, 50.0}, {"B", 10, ClusterScores{0.6, 0.1, 0.8}, 70.0}};
        finalize_report(r);
        REQUIRE(r.macro.has_value());
        CHECK(r.macro->v_measure == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(r.macro->mutual_info == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(r.macro->fowlkes_mallows == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(r.nll_bound == 60.0);
        const auto j = nlohmann::json::parse(r.to_json());
        CHECK(j["per_class"]["B"]["nll_bound"] == 70.0);
    }
}
