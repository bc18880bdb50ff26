#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slwla/config.hpp"
#include "slwla/corpus.hpp"
#include "slwla/encoder.hpp"
#include "slwla/episode.hpp"
#include "slwla/label_augmentation.hpp"
#include "slwla/results.hpp"
#include "slwla/synthetic.hpp"

namespace slwla {

/// Loads the corpus named by the config and attaches its aspect split. When no split file is
/// configured, <corpus>.split.json is used, and generated from split_seed if absent.
Corpus load_run_corpus(const RunConfig& cfg);

/// Encoder from the config, wrapped in a persistent cache when a cache directory is set
/// (config key cache_dir, else $SLWLA_CACHE_DIR).
class RunEncoder {
public:
    explicit RunEncoder(const RunConfig& cfg);
    ~RunEncoder();
    RunEncoder(const RunEncoder&) = delete;
    RunEncoder& operator=(const RunEncoder&) = delete;

    const Encoder& get() const { return *encoder_; }
    void flush() const;

private:
    std::shared_ptr<const Encoder> encoder_;
    std::shared_ptr<const CachingEncoder> caching_;
    std::filesystem::path cache_file_;
};

/// Writes the augmented-label file to cfg.labels_file and prints a per-label summary.
AugmentedLabelSet cmd_augment_labels(const RunConfig& cfg, const std::vector<Split>& splits, std::ostream& out);

/// Checks the ablation / label-file pairing. Returns the label set the variant needs, or
/// nullopt for variants that ignore labels. Throws ConfigError on a bad combination.
std::optional<AugmentedLabelSet> labels_for_variant(const RunConfig& cfg, const Corpus& corpus,
                                                    const std::string& encoder_id);

struct TrainOutputs {
    std::filesystem::path checkpoint;
    std::filesystem::path log;
    std::filesystem::path config_snapshot;
    TrainingResult result;
};

/// Trains, then writes checkpoint.bin, train_log.jsonl and config.resolved under output_dir.
TrainOutputs cmd_train(const RunConfig& cfg, std::ostream& out);

/// Evaluates a checkpoint on test episodes drawn with its test_seed and appends the record to
/// <output_dir>/results.jsonl. `overrides` are applied on top of the checkpoint's config.
ResultRecord cmd_evaluate(const std::filesystem::path& checkpoint,
                          const std::map<std::string, std::string>& overrides, std::ostream& out);

enum class ReportFormat { text, csv, json };
ReportFormat parse_report_format(const std::string& name);

ResultsTable cmd_report(const std::vector<std::filesystem::path>& stores, ReportFormat format,
                        std::ostream& out, std::vector<Scenario> requested = {});

Episode cmd_sample_episode(const RunConfig& cfg, Split split, std::optional<std::size_t> query_total,
                           std::uint64_t seed, std::ostream& out);

void cmd_corpus_stats(const RunConfig& cfg, std::size_t sample_size, std::uint64_t seed, std::ostream& out);

/// Writes corpus.jsonl, rig.json and corpus.jsonl.split.json into `dir`.
SyntheticCorpus cmd_synth_corpus(const SyntheticSpec& spec, SplitCounts counts, std::uint64_t split_seed,
                                 const std::filesystem::path& dir, std::ostream& out);

}  // namespace slwla
