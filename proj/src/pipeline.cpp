#include "pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "corpus.hpp"
#include "errors.hpp"
#include "glyphs.hpp"
#include "image_io.hpp"

namespace typeclust {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

struct ClassData {
    std::string char_class;
    std::vector<std::size_t> indices; // positions in the full dataset
    std::vector<GlyphImage> images;
    std::vector<std::vector<double>> xs;
};

std::vector<ClassData> split_classes(const std::vector<GlyphImage>& dataset, double threshold)
{
    std::vector<ClassData> out;
    for (const auto& cls : class_labels(dataset)) {
        ClassData c;
        c.char_class = cls;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset[i].char_class == cls) {
                c.indices.push_back(i);
                c.images.push_back(dataset[i]);
            }
        c.xs = binarized_pixels(c.images, threshold);
        out.push_back(std::move(c));
    }
    return out;
}

const ClassModel& model_for(const Checkpoint& ck, const std::string& cls)
{
    const ClassModel* m = ck.find(cls);
    if (!m)
        throw ArgumentError("checkpoint has no model for class '" + cls + "'");
    return *m;
}

GlyphImage probs_image(const std::vector<double>& p, int canvas)
{
    GlyphImage img(canvas, canvas);
    img.pixels = p;
    return img;
}

} // namespace

std::vector<std::string> synth_classes(const RunConfig& cfg)
{
    return cfg.classes.empty() ? builtin_classes() : cfg.classes;
}

SyntheticCorpus synthesize_class(const RunConfig& cfg, const std::string& char_class)
{
    return generate_corpus(builtin_casts(char_class, cfg.train.model.canvas), cfg.perturb, cfg.seed);
}

SynthOutput run_synth(const RunConfig& cfg)
{
    std::vector<GlyphImage> images;
    std::vector<TruthRecord> truth;
    for (const auto& cls : synth_classes(cfg)) {
        auto corpus = synthesize_class(cfg, cls);
        images.insert(images.end(), corpus.images.begin(), corpus.images.end());
        truth.insert(truth.end(), corpus.truth.begin(), corpus.truth.end());
    }
    SynthOutput out;
    out.manifest = save_dataset(images, cfg.out);
    out.truth = cfg.out / "truth.jsonl";
    write_truth(truth, out.truth);
    out.examples = images.size();
    return out;
}

std::vector<GlyphImage> load_run_dataset(const RunConfig& cfg)
{
    if (cfg.data.empty())
        throw ArgumentError("no dataset manifest configured (set \"data\")");
    auto all = load_dataset(cfg.data, cfg.train.model.canvas);
    if (cfg.classes.empty())
        return all;
    std::vector<GlyphImage> out;
    for (const auto& cls : cfg.classes) {
        auto sel = select_class(all, cls);
        if (sel.empty())
            throw ArgumentError("dataset has no images of class '" + cls + "'");
        out.insert(out.end(), sel.begin(), sel.end());
    }
    return out;
}

Checkpoint train_dataset(const std::vector<GlyphImage>& dataset, const RunConfig& cfg,
                         std::map<std::string, std::vector<EpochLog>>* traces, const ClassProgressFn& progress)
{
    if (dataset.empty())
        throw ArgumentError("train: empty dataset");
    Checkpoint ck;
    ck.config = cfg.train;
    for (const auto& c : split_classes(dataset, cfg.train.binarize_threshold)) {
        TrainConfig tc = cfg.train;
        tc.seed = class_seed(cfg.seed, c.char_class);
        ProgressFn fn;
        if (progress)
            fn = [&](const EpochLog& l) { progress(c.char_class, l); };
        TrainResult r = train(c.images, tc, fn);
        if (traces)
            (*traces)[c.char_class] = r.trace;
        ck.classes.push_back({c.char_class, std::move(r.state), std::move(r.lambdas), data_fingerprint(c.xs)});
    }
    return ck;
}

fs::path checkpoint_path(const RunConfig& cfg)
{
    return cfg.checkpoint.empty() ? cfg.out / "model.json" : cfg.checkpoint;
}

fs::path run_train(const RunConfig& cfg, const ClassProgressFn& progress)
{
    const auto dataset = load_run_dataset(cfg);
    std::map<std::string, std::vector<EpochLog>> traces;
    const Checkpoint ck = train_dataset(dataset, cfg, &traces, progress);
    const fs::path path = checkpoint_path(cfg);
    save_checkpoint(ck, path);
    for (const auto& [cls, trace] : traces) {
        std::string csv = "epoch,objective,kl_weight\n";
        for (const auto& l : trace)
            csv += std::to_string(l.epoch) + "," + fmt_double(l.objective) + "," + fmt_double(l.kl_weight) + "\n";
        write_text(cfg.out / ("loss_" + cls + ".csv"), csv);
    }
    return path;
}

LambdaTable lambdas_for(const ClassModel& model, std::span<const std::vector<double>> xs, const EvalConfig& eval)
{
    if (model.lambdas.examples() == xs.size() && model.lambdas.K == model.state.K() &&
        model.data_hash == data_fingerprint(xs))
        return model.lambdas;
    return fit_lambda(xs, model.state, eval.align_steps, eval.align_learning_rate);
}

Report evaluate_dataset(const Checkpoint& ck, const std::vector<GlyphImage>& dataset, const RunConfig& cfg)
{
    Report report;
    report.variant = to_string(ck.config.model.variant);
    report.K = ck.config.model.K;
    for (const auto& c : split_classes(dataset, ck.config.binarize_threshold)) {
        const ClassModel& m = model_for(ck, c.char_class);
        const LambdaTable lambdas = lambdas_for(m, c.xs, cfg.eval);
        ClassReport cr;
        cr.char_class = c.char_class;
        cr.examples = c.images.size();
        const bool truth = std::all_of(c.images.begin(), c.images.end(),
                                       [](const GlyphImage& g) { return g.true_font.has_value(); });
        if (truth) {
            std::vector<int> labels;
            for (const auto& g : c.images)
                labels.push_back(*g.true_font);
            cr.scores = score_clustering(labels, assign_all(c.xs, m.state, lambdas));
        }
        cr.nll_bound = nll_bound(c.xs, m.state, lambdas, cfg.eval.nll_samples,
                                 derive_seed(cfg.seed, "nll:" + c.char_class, 0));
        report.per_class.push_back(std::move(cr));
    }
    finalize_report(report);
    return report;
}

fs::path run_eval(const RunConfig& cfg)
{
    const Checkpoint ck = load_checkpoint(checkpoint_path(cfg));
    const Report report = evaluate_dataset(ck, load_run_dataset(cfg), cfg);
    const fs::path path = cfg.out / "metrics.json";
    write_text(path, report.to_json() + "\n");
    return path;
}

fs::path run_assign(const RunConfig& cfg)
{
    const Checkpoint ck = load_checkpoint(checkpoint_path(cfg));
    const auto dataset = load_run_dataset(cfg);
    std::vector<int> pred(dataset.size(), -1);
    for (const auto& c : split_classes(dataset, ck.config.binarize_threshold)) {
        const ClassModel& m = model_for(ck, c.char_class);
        const auto p = assign_all(c.xs, m.state, lambdas_for(m, c.xs, cfg.eval));
        for (std::size_t i = 0; i < p.size(); ++i)
            pred[c.indices[i]] = p[i];
    }
    std::string csv = "index,char_class,pred,true\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        csv += std::to_string(i) + "," + dataset[i].char_class + "," + std::to_string(pred[i]) + ",";
        if (dataset[i].true_font)
            csv += std::to_string(*dataset[i].true_font);
        csv += "\n";
    }
    const fs::path path = cfg.out / "assignments.csv";
    write_text(path, csv);
    return path;
}

std::vector<GlyphImage> align_class(const ClassModel& model, const std::vector<GlyphImage>& images,
                                    const RunConfig& cfg)
{
    const double threshold = cfg.train.binarize_threshold;
    const auto xs = binarized_pixels(images, threshold);
    const LambdaTable lambdas = lambdas_for(model, xs, cfg.eval);
    const auto pred = assign_all(xs, model.state, lambdas);
    std::vector<GlyphImage> out;
    out.reserve(images.size());
    for (std::size_t d = 0; d < images.size(); ++d) {
        GlyphImage x = binarize(images[d], threshold);
        GlyphImage aligned = inverse_align(x, lambdas.at(d, pred[d]), model.state.cfg.bandwidth);
        aligned = binarize(aligned, threshold);
        aligned.char_class = images[d].char_class;
        aligned.true_font = images[d].true_font;
        aligned.source_id = images[d].source_id;
        out.push_back(std::move(aligned));
    }
    return out;
}

std::map<std::string, AlignStats> run_align(const RunConfig& cfg)
{
    const Checkpoint ck = load_checkpoint(checkpoint_path(cfg));
    const auto dataset = load_run_dataset(cfg);
    RunConfig c2 = cfg;
    c2.train.binarize_threshold = ck.config.binarize_threshold;
    std::map<std::string, AlignStats> stats;
    for (const auto& c : split_classes(dataset, ck.config.binarize_threshold)) {
        const auto aligned = align_class(model_for(ck, c.char_class), c.images, c2);
        std::vector<GlyphImage> unaligned;
        for (const auto& img : c.images)
            unaligned.push_back(binarize(img, ck.config.binarize_threshold));
        for (std::size_t i = 0; i < aligned.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "%s_%05zu.pgm", c.char_class.c_str(), c.indices[i]);
            fs::create_directories(cfg.out / "aligned");
            save_image(aligned[i], cfg.out / "aligned" / name);
        }
        save_image(mean_image(unaligned), cfg.out / (c.char_class + "_unaligned_mean.png"));
        save_image(mean_image(aligned), cfg.out / (c.char_class + "_aligned_mean.png"));
        stats[c.char_class] = {stack_variance(unaligned), stack_variance(aligned)};
    }
    std::string csv = "char_class,unaligned_variance,aligned_variance\n";
    for (const auto& [cls, s] : stats)
        csv += cls + "," + fmt_double(s.unaligned_variance) + "," + fmt_double(s.aligned_variance) + "\n";
    write_text(cfg.out / "alignment.csv", csv);
    return stats;
}

std::vector<fs::path> run_export_templates(const RunConfig& cfg)
{
    const Checkpoint ck = load_checkpoint(checkpoint_path(cfg));
    std::vector<ClassData> classes;
    if (!cfg.data.empty())
        classes = split_classes(load_run_dataset(cfg), ck.config.binarize_threshold);
    fs::create_directories(cfg.out);
    std::vector<fs::path> written;
    for (const auto& m : ck.classes) {
        if (!cfg.classes.empty() && std::find(cfg.classes.begin(), cfg.classes.end(), m.char_class) == cfg.classes.end())
            continue;
        const int canvas = m.state.canvas();
        std::vector<GlyphImage> tmpl;
        for (int k = 0; k < m.state.K(); ++k)
            tmpl.push_back(probs_image(m.state.template_probs(k), canvas));
        written.push_back(cfg.out / ("templates_" + m.char_class + ".png"));
        save_image(tile_grid({tmpl}), written.back());

        auto it = std::find_if(classes.begin(), classes.end(),
                               [&](const ClassData& c) { return c.char_class == m.char_class; });
        if (it == classes.end())
            continue;
        const LambdaTable lambdas = lambdas_for(m, it->xs, cfg.eval);
        const auto pred = assign_all(it->xs, m.state, lambdas);
        const std::vector<double> zero(std::size_t(m.state.cfg.editor.z_dim), 0.0);
        std::vector<std::vector<GlyphImage>> rows;
        for (int k = 0; k < m.state.K(); ++k) {
            std::vector<GlyphImage> xs_row, tilde_row, hat_row;
            for (std::size_t d = 0; d < it->xs.size() && int(xs_row.size()) < cfg.eval.grid_examples; ++d) {
                if (pred[d] != k)
                    continue;
                const ComponentPass pass = component_forward(it->xs[d], k, lambdas.at(d, k), m.state, zero);
                xs_row.push_back(probs_image(it->xs[d], canvas));
                tilde_row.push_back(probs_image(pass.t_tilde, canvas));
                hat_row.push_back(probs_image(pass.t_hat, canvas));
            }
            if (xs_row.empty())
                continue;
            rows.push_back(std::move(xs_row));
            rows.push_back(std::move(tilde_row));
            rows.push_back(std::move(hat_row));
        }
        if (!rows.empty()) {
            written.push_back(cfg.out / ("examples_" + m.char_class + ".png"));
            save_image(tile_grid(rows), written.back());
        }
    }
    return written;
}

} // namespace typeclust
