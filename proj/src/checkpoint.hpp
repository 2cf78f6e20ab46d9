#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mixture.hpp"
#include "trainer.hpp"

namespace typeclust {

inline constexpr int kCheckpointFormatVersion = 1;

// One trained mixture per character class.
struct ClassModel {
    std::string char_class;
    MixtureState state;
    LambdaTable lambdas;   // rows follow the training order for this class
    std::string data_hash; // fingerprint of the binarized training images
};

struct Checkpoint {
    TrainConfig config; // threads is not stored
    std::vector<ClassModel> classes;

    const ClassModel* find(const std::string& char_class) const;
    std::string config_hash() const; // hex FNV-1a of the canonical model configuration
};

std::string hex64(std::uint64_t v);
std::string data_fingerprint(std::span<const std::vector<double>> xs);

// JSON container; doubles round-trip exactly.
std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text); // FormatError

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path); // IoError, FormatError

} // namespace typeclust
