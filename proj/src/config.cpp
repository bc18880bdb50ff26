#include "slwla/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "slwla/error.hpp"

namespace slwla {

namespace {

std::size_t to_size(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
        auto v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::map<std::string, std::string> RunConfig::to_key_values() const {
    auto kv = training.to_key_values();
    kv["config_version"] = config_format_version;
    kv["corpus"] = corpus.string();
    kv["split_file"] = split_file.string();
    kv["labels_file"] = labels_file.string();
    kv["output_dir"] = output_dir.string();
    kv["cache_dir"] = cache_dir.string();
    kv["encoder"] = encoder;
    kv["mlm_rig"] = mlm_rig.string();
    kv["d"] = std::to_string(dim);
    kv["max_len"] = std::to_string(max_len);
    kv["ablation"] = to_string(ablation);
    kv["split_train"] = std::to_string(split_counts.train);
    kv["split_valid"] = std::to_string(split_counts.valid);
    kv["split_test"] = std::to_string(split_counts.test);
    kv["split_seed"] = std::to_string(split_seed);
    kv["sentences_per_class"] = std::to_string(sentences_per_class);
    kv["augment_seed"] = std::to_string(augment_seed);
    return kv;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (training.set(key, value)) return;
    if (key == "config_version") {
        if (value != config_format_version)
            throw CompatibilityError("config format version '" + value + "' is not supported");
    } else if (key == "corpus") corpus = value;
    else if (key == "split_file") split_file = value;
    else if (key == "labels_file") labels_file = value;
    else if (key == "output_dir") output_dir = value;
    else if (key == "cache_dir") cache_dir = value;
    else if (key == "encoder") encoder = value;
    else if (key == "mlm_rig") mlm_rig = value;
    else if (key == "d") dim = to_size(key, value);
    else if (key == "max_len") max_len = to_size(key, value);
    else if (key == "ablation") ablation = parse_variant(value);
    else if (key == "split_train") split_counts.train = to_size(key, value);
    else if (key == "split_valid") split_counts.valid = to_size(key, value);
    else if (key == "split_test") split_counts.test = to_size(key, value);
    else if (key == "split_seed") split_seed = to_size(key, value);
    else if (key == "sentences_per_class") sentences_per_class = to_size(key, value);
    else if (key == "augment_seed") augment_seed = to_size(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::apply(const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) set(k, v);
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) out << k << " = " << v << '\n';
}

}  // namespace slwla

namespace slwla {

RunConfig resolve_config(const std::filesystem::path& config_file,
                         const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    if (!config_file.empty()) cfg.apply(load_key_values(config_file));
    cfg.apply(overrides);
    return cfg;
}

}  // namespace slwla
