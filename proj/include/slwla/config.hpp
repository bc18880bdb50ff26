#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "slwla/attention.hpp"
#include "slwla/corpus.hpp"
#include "slwla/encoder.hpp"
#include "slwla/training.hpp"

namespace slwla {

inline constexpr const char* config_format_version = "1";

/// Everything a command needs. Resolution order: defaults, then config file, then flags.
struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path split_file;   // empty: <corpus>.split.json, generated when missing
    std::filesystem::path labels_file;
    std::filesystem::path output_dir = "runs/default";
    std::filesystem::path cache_dir;    // empty: $SLWLA_CACHE_DIR, or no cache
    std::string encoder = "mock:0";
    std::filesystem::path mlm_rig;
    std::size_t dim = 768;
    std::size_t max_len = 50;
    Variant ablation = Variant::slwla;
    SplitCounts split_counts;
    std::uint64_t split_seed = 0;
    std::size_t sentences_per_class = 2000;
    std::uint64_t augment_seed = 0;
    TrainingConfig training;

    EncoderOptions encoder_options() const { return {encoder, dim, max_len, mlm_rig}; }

    std::map<std::string, std::string> to_key_values() const;
    /// Throws ConfigError for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    void apply(const std::map<std::string, std::string>& values);
};

/// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source);
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const std::map<std::string, std::string>& values);

/// Environment variable naming the default embedding-cache directory.
inline constexpr const char* cache_dir_env = "SLWLA_CACHE_DIR";

}  // namespace slwla

namespace slwla {

/// Defaults, then the config file (if non-empty), then `overrides`.
RunConfig resolve_config(const std::filesystem::path& config_file,
                         const std::map<std::string, std::string>& overrides);

}  // namespace slwla
