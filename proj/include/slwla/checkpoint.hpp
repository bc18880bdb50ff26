#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slwla/attention.hpp"
#include "slwla/training.hpp"

namespace slwla {

/// Binary checkpoint (little-endian):
///   "SLWLACKP" | u32 format version | u64 metadata length | metadata JSON |
///   u32 tensor count | per tensor: u32 name length, name, u64 rows, u64 cols, rows*cols f64 |
///   u64 FNV-1a checksum of every preceding byte.
struct Checkpoint {
    static constexpr std::uint32_t format_version = 1;

    std::map<std::string, std::string> config;  // resolved run configuration
    std::string encoder_id;
    Variant variant = Variant::slwla;
    std::size_t m = 0;
    std::map<AspectId, std::string> label_texts;  // combined label text per aspect
    ModelParams params;
    std::size_t best_epoch = 0;
    double best_val_auc = 0.0;
    std::string rng_state;
    std::vector<EpochLog> log;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws CompatibilityError on a wrong magic, version, checksum or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace slwla
