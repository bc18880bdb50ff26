#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace slwla {

using LabelBits = std::vector<std::uint8_t>;

/// Scores are softmax(-distance) per query; decisions follow threshold_decide.
struct EpisodePrediction {
    std::vector<Eigen::VectorXd> distances;
    std::vector<Eigen::VectorXd> scores;
    std::vector<LabelBits> decisions;
};

/// Bit n set iff scores[n] >= tau; the argmax bit is set when nothing passes.
LabelBits threshold_decide(const Eigen::VectorXd& scores, double tau);

/// Euclidean distance of each query's per-class representation to its prototype, then
/// softmax over the negated distances.
EpisodePrediction predict_episode(const Eigen::MatrixXd& prototypes, const std::vector<Eigen::MatrixXd>& query_reps,
                                  double tau);

/// Gold vector divided by its bit count. Throws ValidationError on an all-zero vector.
Eigen::VectorXd normalized_gold(const LabelBits& gold);

/// Sum over queries and classes of (score - normalized gold)^2.
double episode_loss(const EpisodePrediction& prediction, const std::vector<LabelBits>& gold);

struct LossGradient {
    double loss = 0.0;
    Eigen::MatrixXd d_prototypes;          // d x N
    std::vector<Eigen::MatrixXd> d_reps;   // per query, d x N
};

/// episode_loss together with its gradient w.r.t. prototypes and query representations.
/// The distance gradient at zero distance is taken as 0.
LossGradient episode_loss_gradient(const Eigen::MatrixXd& prototypes, const std::vector<Eigen::MatrixXd>& query_reps,
                                   const std::vector<LabelBits>& gold);

/// Rank-based (Mann-Whitney) AUC with average ranks for ties; nullopt when every label is the
/// same.
std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

/// Per-class F1 over the episode's queries, averaged over classes, in [0, 1]. A class with no
/// true positives scores 0.
double macro_f1(const std::vector<LabelBits>& decisions, const std::vector<LabelBits>& gold);

enum class AucMode { pooled, macro };

/// AUC of one episode. `pooled` ranks all (query, class) pairs together; `macro` averages the
/// per-class AUCs of classes that have both positive and negative queries.
std::optional<double> episode_auc(const std::vector<Eigen::VectorXd>& scores, const std::vector<LabelBits>& gold,
                                  AucMode mode);

}  // namespace slwla
