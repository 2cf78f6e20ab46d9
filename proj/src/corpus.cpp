#include "corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"
#include "image_io.hpp"

namespace typeclust {

using nlohmann::json;

namespace {

ManifestEntry parse_entry(const json& j, std::string_view alphabet, const std::string& where)
{
    if (!j.is_object())
        throw FormatError(where + ": manifest line is not a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "path" && k != "char_class" && k != "true_font" && k != "source_id")
            throw FormatError(where + ": unknown manifest field '" + k + "'");
    }
    if (!j.contains("path") || !j["path"].is_string())
        throw FormatError(where + ": missing string field 'path'");
    if (!j.contains("char_class") || !j["char_class"].is_string())
        throw FormatError(where + ": missing string field 'char_class'");

    ManifestEntry e;
    e.path = j["path"].get<std::string>();
    e.char_class = j["char_class"].get<std::string>();
    if (e.char_class.size() != 1 || alphabet.find(e.char_class[0]) == std::string_view::npos)
        throw FormatError(where + ": char_class '" + e.char_class + "' is not in the declared alphabet");
    if (j.contains("true_font") && !j["true_font"].is_null()) {
        if (!j["true_font"].is_number_integer())
            throw FormatError(where + ": 'true_font' must be an integer");
        e.true_font = j["true_font"].get<int>();
    }
    if (j.contains("source_id") && !j["source_id"].is_null()) {
        if (!j["source_id"].is_string())
            throw FormatError(where + ": 'source_id' must be a string");
        e.source_id = j["source_id"].get<std::string>();
    }
    return e;
}

} // namespace

DatasetManifest read_manifest(const std::filesystem::path& manifest_path, std::string_view alphabet)
{
    std::ifstream in(manifest_path);
    if (!in)
        throw IoError("cannot open manifest: " + manifest_path.string());
    DatasetManifest m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
            continue;
        std::string where = manifest_path.string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(where + ": " + e.what());
        }
        m.entries.push_back(parse_entry(j, alphabet, where));
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& manifest_path)
{
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write manifest: " + manifest_path.string());
    for (const auto& e : manifest.entries) {
        json j;
        j["path"] = e.path;
        j["char_class"] = e.char_class;
        if (e.true_font)
            j["true_font"] = *e.true_font;
        if (e.source_id)
            j["source_id"] = *e.source_id;
        out << j.dump() << '\n';
    }
    if (!out)
        throw IoError("write failed: " + manifest_path.string());
}

std::vector<GlyphImage> load_dataset(const std::filesystem::path& manifest_path, int canvas, std::string_view alphabet)
{
    auto manifest = read_manifest(manifest_path, alphabet);
    const auto base = manifest_path.parent_path();
    std::vector<GlyphImage> images;
    images.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        std::filesystem::path p = e.path;
        if (p.is_relative())
            p = base / p;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(p, ec))
            throw IoError("manifest references missing image: " + p.string());
        GlyphImage img = normalize_to_canvas(read_image(p), canvas);
        img.char_class = e.char_class;
        img.true_font = e.true_font;
        img.source_id = e.source_id.value_or(e.path);
        images.push_back(std::move(img));
    }
    return images;
}

std::filesystem::path save_dataset(const std::vector<GlyphImage>& images, const std::filesystem::path& dir,
                                   const std::string& manifest_name)
{
    std::filesystem::create_directories(dir / "images");
    DatasetManifest m;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& img = images[i];
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%05zu.pgm", img.char_class.c_str(), i);
        std::string rel = std::string("images/") + name;
        save_image(img, dir / rel);
        ManifestEntry e{rel, img.char_class, img.true_font, std::nullopt};
        if (!img.source_id.empty())
            e.source_id = img.source_id;
        m.entries.push_back(std::move(e));
    }
    if (!images.empty())
        m.canvas_size = images.front().height;
    auto manifest_path = dir / manifest_name;
    write_manifest(m, manifest_path);
    return manifest_path;
}

std::vector<std::string> class_labels(const std::vector<GlyphImage>& images)
{
    std::vector<std::string> out;
    for (const auto& img : images)
        if (std::find(out.begin(), out.end(), img.char_class) == out.end())
            out.push_back(img.char_class);
    return out;
}

std::vector<GlyphImage> select_class(const std::vector<GlyphImage>& images, const std::string& char_class)
{
    std::vector<GlyphImage> out;
    std::copy_if(images.begin(), images.end(), std::back_inserter(out),
                 [&](const GlyphImage& g) { return g.char_class == char_class; });
    return out;
}

} // namespace typeclust
