#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "image.hpp"

namespace typeclust {

struct ManifestEntry {
    std::string path; // relative paths resolve against the manifest's directory
    std::string char_class;
    std::optional<int> true_font;
    std::optional<std::string> source_id;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int canvas_size = kDefaultCanvas;
};

// Letters and digits; a class label is one symbol from this set.
inline constexpr std::string_view kDefaultAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

// Parses a JSON Lines manifest. Unknown fields are rejected.
DatasetManifest read_manifest(const std::filesystem::path& manifest_path,
                              std::string_view alphabet = kDefaultAlphabet);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& manifest_path);

// Loads every manifest entry in order, resampled to canvas x canvas and
// min-max normalized. Errors name the offending path.
std::vector<GlyphImage> load_dataset(const std::filesystem::path& manifest_path, int canvas = kDefaultCanvas,
                                     std::string_view alphabet = kDefaultAlphabet);

// Writes images as PGM files under dir/images and a manifest at dir/manifest_name.
// Returns the manifest path.
std::filesystem::path save_dataset(const std::vector<GlyphImage>& images, const std::filesystem::path& dir,
                                   const std::string& manifest_name = "manifest.jsonl");

// Distinct classes in first-appearance order.
std::vector<std::string> class_labels(const std::vector<GlyphImage>& images);

std::vector<GlyphImage> select_class(const std::vector<GlyphImage>& images, const std::string& char_class);

} // namespace typeclust
