#include "synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "errors.hpp"

namespace typeclust {

using nlohmann::json;

GlyphImage morph(const GlyphImage& img, MorphKind kind, int kernel_size)
{
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw ArgumentError("morph: kernel size must be a positive odd integer, got " + std::to_string(kernel_size));
    const int r = kernel_size / 2;
    GlyphImage out = img;
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j) {
            double acc = kind == MorphKind::erode ? 1.0 : 0.0;
            for (int a = -r; a <= r; ++a)
                for (int b = -r; b <= r; ++b) {
                    const int y = i + a, x = j + b;
                    const double v = (y < 0 || y >= img.height || x < 0 || x >= img.width) ? 0.0 : img.at(y, x);
                    acc = kind == MorphKind::erode ? std::min(acc, v) : std::max(acc, v);
                }
            out.at(i, j) = acc;
        }
    return out;
}

void PerturbConfig::validate() const
{
    if (offset_range < 0 || rotation_range < 0 || shear_range < 0 || scale_range < 0 || noise_sigma < 0)
        throw ArgumentError("PerturbConfig: ranges must be non-negative");
    if (scale_range >= 1.0 || shear_range >= 1.0)
        throw ArgumentError("PerturbConfig: scale and shear ranges must be below 1");
    if (morph_kernel_sizes.empty())
        throw ArgumentError("PerturbConfig: morph_kernel_sizes must not be empty");
    for (int k : morph_kernel_sizes)
        if (k < 1 || k % 2 == 0)
            throw ArgumentError("PerturbConfig: morph kernel sizes must be odd and >= 1");
    if (examples_per_cast < 1)
        throw ArgumentError("PerturbConfig: examples_per_cast must be >= 1");
    if (!(bandwidth > 0))
        throw ArgumentError("PerturbConfig: bandwidth must be positive");
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t index)
{
    // splitmix64 finalization of the seed combined with the tag hash
    const std::uint64_t h = fnv1a64(tag);
    std::uint64_t z = seed ^ (h + 0x9e3779b97f4a7c15ull + (index << 6) + (index >> 2));
    z += 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

GlyphImage render_example(const GlyphImage& base, const TruthRecord& rec, double bandwidth)
{
    GlyphImage img = binarize(warp_image(base, rec.lambda, bandwidth), 0.5);
    for (const auto& m : rec.morphs)
        img = morph(img, m.kind, m.kernel);
    if (rec.noise_sigma > 0) {
        std::mt19937_64 rng(rec.noise_seed);
        std::normal_distribution<double> noise(0.0, rec.noise_sigma);
        for (double& p : img.pixels)
            p = std::clamp(p + noise(rng), 0.0, 1.0);
    }
    img.char_class = base.char_class;
    img.true_font = rec.true_font;
    return img;
}

SyntheticCorpus generate_corpus(const std::vector<GlyphImage>& base_casts, const PerturbConfig& cfg,
                                std::uint64_t seed)
{
    cfg.validate();
    if (base_casts.size() < 2)
        throw ArgumentError("generate_corpus: need at least 2 base casts, got " + std::to_string(base_casts.size()));
    for (const auto& b : base_casts)
        if (b.height != b.width || b.height != base_casts.front().height)
            throw ArgumentError("generate_corpus: base casts must share one square canvas");

    SyntheticCorpus out;
    const std::string cls = base_casts.front().char_class;
    std::size_t index = 0;
    for (std::size_t cast = 0; cast < base_casts.size(); ++cast) {
        for (int e = 0; e < cfg.examples_per_cast; ++e, ++index) {
            std::mt19937_64 rng(derive_seed(seed, cls, index));
            auto uni = [&](double r) { return r > 0 ? std::uniform_real_distribution<double>(-r, r)(rng) : 0.0; };
            auto kernel = [&] {
                std::uniform_int_distribution<std::size_t> pick(0, cfg.morph_kernel_sizes.size() - 1);
                return cfg.morph_kernel_sizes[pick(rng)];
            };

            TruthRecord rec;
            rec.index = index;
            rec.char_class = cls;
            rec.true_font = base_casts[cast].true_font.value_or(int(cast));
            rec.lambda.r = uni(cfg.rotation_range);
            rec.lambda.o_h = uni(cfg.offset_range);
            rec.lambda.o_v = uni(cfg.offset_range);
            rec.lambda.s_h = uni(cfg.shear_range);
            rec.lambda.s_v = uni(cfg.shear_range);
            rec.lambda.a = uni(cfg.scale_range);

            // erosion, dilation, or a combination of both in random order
            switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
            case 0: rec.morphs = {{MorphKind::erode, kernel()}}; break;
            case 1: rec.morphs = {{MorphKind::dilate, kernel()}}; break;
            default: {
                MorphStep first{MorphKind::erode, kernel()};
                MorphStep second{MorphKind::dilate, kernel()};
                if (std::uniform_int_distribution<int>(0, 1)(rng))
                    std::swap(first, second);
                rec.morphs = {first, second};
            }
            }
            rec.noise_seed = rng();
            rec.noise_sigma = cfg.noise_sigma;

            GlyphImage img = render_example(base_casts[cast], rec, cfg.bandwidth);
            img.source_id = cls + "/cast" + std::to_string(rec.true_font) + "/" + std::to_string(index);
            out.images.push_back(std::move(img));
            out.truth.push_back(std::move(rec));
        }
    }
    return out;
}

namespace {

json to_json(const TruthRecord& r)
{
    json lam = {{"r", r.lambda.r},     {"o_h", r.lambda.o_h}, {"o_v", r.lambda.o_v},
                {"s_h", r.lambda.s_h}, {"s_v", r.lambda.s_v}, {"a", r.lambda.a}};
    json morphs = json::array();
    for (const auto& m : r.morphs)
        morphs.push_back({{"kind", m.kind == MorphKind::erode ? "erode" : "dilate"}, {"kernel", m.kernel}});
    return {{"index", r.index},           {"char_class", r.char_class}, {"true_font", r.true_font},
            {"lambda", lam},              {"morphs", morphs},           {"noise_seed", r.noise_seed},
            {"noise_sigma", r.noise_sigma}};
}

TruthRecord from_json(const json& j)
{
    TruthRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.char_class = j.at("char_class").get<std::string>();
    r.true_font = j.at("true_font").get<int>();
    const auto& l = j.at("lambda");
    r.lambda = {l.at("r").get<double>(),   l.at("o_h").get<double>(), l.at("o_v").get<double>(),
                l.at("s_h").get<double>(), l.at("s_v").get<double>(), l.at("a").get<double>()};
    for (const auto& m : j.at("morphs")) {
        auto kind = m.at("kind").get<std::string>();
        if (kind != "erode" && kind != "dilate")
            throw FormatError("truth record: unknown morph kind '" + kind + "'");
        r.morphs.push_back({kind == "erode" ? MorphKind::erode : MorphKind::dilate, m.at("kernel").get<int>()});
    }
    r.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    r.noise_sigma = j.at("noise_sigma").get<double>();
    return r;
}

} // namespace

void write_truth(const std::vector<TruthRecord>& truth, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write truth file: " + path.string());
    for (const auto& r : truth)
        out << to_json(r).dump() << '\n';
}

std::vector<TruthRecord> read_truth(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open truth file: " + path.string());
    std::vector<TruthRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            out.push_back(from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw FormatError("truth file " + path.string() + ": " + e.what());
        }
    }
    return out;
}

} // namespace typeclust
