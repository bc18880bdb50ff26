#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slwla/attention.hpp"
#include "slwla/corpus.hpp"
#include "slwla/encoder.hpp"
#include "slwla/episode.hpp"
#include "slwla/label_augmentation.hpp"
#include "slwla/metrics.hpp"

namespace slwla {

enum class OptimizerKind { sgd, adam };

/// Batch size in episodes: 4 for N <= 5, 2 above.
std::size_t default_batch_size(std::size_t way);

struct TrainingConfig {
    double learning_rate = 1e-5;
    std::size_t episodes_per_epoch = 800;
    std::size_t val_episodes = 600;
    std::size_t test_episodes = 600;
    std::size_t batch_size = 0;  // 0 selects default_batch_size(way)
    std::size_t patience = 3;
    std::size_t max_epochs = 30;
    double tau = 0.3;
    std::size_t repeat = 4;  // e_M
    std::size_t m = 1;
    std::size_t way = 5;
    std::size_t shot = 5;
    std::size_t queries_per_class = 5;
    std::uint64_t seed = 1;
    std::uint64_t val_seed = 2;
    std::uint64_t test_seed = 3;
    OptimizerKind optimizer = OptimizerKind::sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    AucMode auc_mode = AucMode::pooled;
    bool fine_tune = false;
    std::size_t threads = 1;

    std::size_t resolved_batch_size() const { return batch_size ? batch_size : default_batch_size(way); }
    EpisodeShape shape() const { return {way, shot, queries_per_class, std::nullopt}; }

    /// Throws ConfigError on non-positive counts or tau outside (0, 1).
    void validate() const;

    std::map<std::string, std::string> to_key_values() const;
    /// Returns false when `key` is not a TrainingConfig key; throws ConfigError on bad values.
    bool set(const std::string& key, const std::string& value);
};

/// Turns sampled episodes into encoder outputs. Label-text embeddings are computed once.
class EpisodeEmbedder {
public:
    EpisodeEmbedder(const Corpus& corpus, const Encoder& encoder, const AugmentedLabelSet* labels);

    EpisodeInputs embed(const Episode& episode) const;
    std::vector<LabelBits> gold(const Episode& episode) const;
    const Corpus& corpus() const noexcept { return corpus_; }
    const Encoder& encoder() const noexcept { return encoder_; }

private:
    const Corpus& corpus_;
    const Encoder& encoder_;
    std::map<AspectId, Eigen::VectorXd> label_embeddings_;
};

/// Forward pass plus prediction for one episode.
EpisodePrediction run_episode(const ModelParams& params, const ForwardOptions& options, const EpisodeInputs& inputs,
                              double tau, ForwardTrace* trace_out = nullptr);

double episode_objective(const ModelParams& params, const EpisodeInputs& inputs, const std::vector<LabelBits>& gold,
                         const ForwardOptions& options);

/// Analytic gradient of episode_objective; the objective value is written to `loss` if given.
ModelParams episode_gradient(const ModelParams& params, const EpisodeInputs& inputs, const std::vector<LabelBits>& gold,
                             const ForwardOptions& options, double* loss = nullptr);

struct MetricsReport {
    double auc = 0.0;       // mean over episodes with a defined AUC
    double macro_f1 = 0.0;  // percent
    std::size_t episodes = 0;
    std::size_t skipped = 0;  // episodes whose AUC was undefined
    double mean_loss = 0.0;
};

MetricsReport evaluate(const ModelParams& params, const ForwardOptions& options, const EpisodeEmbedder& embedder,
                       const std::vector<Episode>& episodes, double tau, AucMode auc_mode, std::size_t threads = 1);

class Optimizer {
public:
    Optimizer(const TrainingConfig& config, const ModelParams& like);
    void step(ModelParams& params, const ModelParams& grad);

private:
    OptimizerKind kind_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    ModelParams first_, second_;
};

/// Tracks the best metric; update() returns true once `patience` epochs pass without improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
    bool update(std::size_t epoch, double metric);
    std::size_t best_epoch() const noexcept { return best_epoch_; }
    double best_metric() const noexcept { return best_; }
    bool improved_last() const noexcept { return since_best_ == 0; }

private:
    std::size_t patience_;
    std::size_t best_epoch_ = 0;
    std::size_t since_best_ = 0;
    double best_ = -1.0;
    bool started_ = false;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_auc = 0.0;
    double val_macro_f1 = 0.0;
    std::size_t val_skipped = 0;
};

struct TrainingResult {
    ModelParams params;  // best-validation-AUC epoch
    std::size_t best_epoch = 0;
    double best_val_auc = 0.0;
    std::vector<EpochLog> log;
    std::string rng_state;
};

struct TrainOptions {
    std::filesystem::path dump_dir;  // divergence dumps go here when set
    std::function<void(const EpochLog&)> on_epoch;
};

/// Episodic training with per-epoch resampling, batch-averaged gradients, fixed-seed
/// validation episodes and early stopping on validation AUC.
TrainingResult train(const TrainingConfig& config, Variant variant, const Corpus& corpus, const Encoder& encoder,
                     const AugmentedLabelSet* labels, const TrainOptions& options = {});

struct TensorCheck {
    std::string name;
    double max_relative_error = 0.0;
    bool passed = true;
};

struct GradientCheckReport {
    std::vector<TensorCheck> tensors;
    bool passed = true;
};

/// Compares episode_gradient against central differences for every parameter tensor. The
/// relative error of a tensor is max_i |a_i - f_i| / max(max|a|, max|f|, 1e-6).
/// `corrupt`, when set, edits the analytic gradient before comparison.
GradientCheckReport gradient_check(const ModelParams& params, const EpisodeInputs& inputs,
                                   const std::vector<LabelBits>& gold, const ForwardOptions& options,
                                   double tolerance, double step = 1e-4,
                                   const std::function<void(ModelParams&)>& corrupt = {});

}  // namespace slwla
