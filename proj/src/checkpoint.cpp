#include "checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "synth.hpp"

namespace typeclust {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormatTag = "typeclust-checkpoint";

} // namespace

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string data_fingerprint(std::span<const std::vector<double>> xs)
{
    std::string bits;
    for (const auto& x : xs) {
        for (double v : x)
            bits.push_back(v >= 0.5 ? '1' : '0');
        bits.push_back('\n');
    }
    return hex64(fnv1a64(bits));
}

const ClassModel* Checkpoint::find(const std::string& char_class) const
{
    for (const auto& c : classes)
        if (c.char_class == char_class)
            return &c;
    return nullptr;
}

std::string Checkpoint::config_hash() const
{
    return hex64(fnv1a64(model_config_json(config)));
}

std::string checkpoint_to_json(const Checkpoint& ck)
{
    ordered_json j;
    j["format"] = kFormatTag;
    j["format_version"] = kCheckpointFormatVersion;
    j["variant"] = to_string(ck.config.model.variant);
    j["K"] = ck.config.model.K;
    j["config_hash"] = ck.config_hash();
    j["config"] = ordered_json::parse(model_config_json(ck.config));
    ordered_json classes = ordered_json::array();
    for (const auto& c : ck.classes) {
        ordered_json e;
        e["char_class"] = c.char_class;
        e["data_hash"] = c.data_hash;
        ordered_json tensors = ordered_json::array();
        for (auto t : c.state.tensors())
            tensors.push_back(std::vector<double>(t.begin(), t.end()));
        e["parameters"] = tensors;
        ordered_json rows = ordered_json::array();
        for (const auto& l : c.lambdas.rows)
            rows.push_back({l.r, l.o_h, l.o_v, l.s_h, l.s_v, l.a});
        e["lambdas"] = rows;
        classes.push_back(e);
    }
    j["classes"] = classes;
    return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    try {
        if (j.value("format", std::string{}) != kFormatTag)
            throw FormatError("checkpoint: not a typeclust checkpoint");
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion)
            throw FormatError("checkpoint: unsupported format_version " + std::to_string(version));
        Checkpoint ck;
        ck.config = train_config_from_json(j.at("config").dump());
        if (ck.config_hash() != j.at("config_hash").get<std::string>())
            throw FormatError("checkpoint: config_hash does not match the stored configuration");
        if (j.at("variant").get<std::string>() != to_string(ck.config.model.variant) ||
            j.at("K").get<int>() != ck.config.model.K)
            throw FormatError("checkpoint: header disagrees with the stored configuration");
        for (const auto& e : j.at("classes")) {
            ClassModel c;
            c.char_class = e.at("char_class").get<std::string>();
            c.data_hash = e.at("data_hash").get<std::string>();
            c.state = MixtureState(ck.config.model);
            auto tensors = c.state.tensors();
            const auto& params = e.at("parameters");
            if (params.size() != tensors.size())
                throw FormatError("checkpoint: class '" + c.char_class + "' has the wrong number of tensors");
            for (std::size_t i = 0; i < tensors.size(); ++i) {
                const auto values = params[i].get<std::vector<double>>();
                if (values.size() != tensors[i].size())
                    throw FormatError("checkpoint: class '" + c.char_class + "' tensor " + std::to_string(i) +
                                      " has the wrong size");
                std::copy(values.begin(), values.end(), tensors[i].begin());
            }
            const auto& rows = e.at("lambdas");
            if (rows.size() % std::size_t(ck.config.model.K) != 0)
                throw FormatError("checkpoint: lambda table is not a multiple of K");
            c.lambdas = LambdaTable(rows.size() / std::size_t(ck.config.model.K), ck.config.model.K);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto v = rows[r].get<std::vector<double>>();
                if (v.size() != SpatialParams::kCount)
                    throw FormatError("checkpoint: lambda row with wrong arity");
                for (int p = 0; p < SpatialParams::kCount; ++p)
                    c.lambdas.rows[r][p] = v[p];
            }
            if (!c.state.all_finite())
                throw FormatError("checkpoint: class '" + c.char_class + "' holds non-finite parameters");
            ck.classes.push_back(std::move(c));
        }
        return ck;
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: malformed field: ") + e.what());
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write checkpoint '" + path.string() + "'");
    out << checkpoint_to_json(ck) << '\n';
    if (!out)
        throw IoError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read checkpoint '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

} // namespace typeclust
