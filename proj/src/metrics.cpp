#include "slwla/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "slwla/attention.hpp"
#include "slwla/error.hpp"

namespace slwla {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LabelBits threshold_decide(const VectorXd& scores, double tau) {
    LabelBits bits(static_cast<std::size_t>(scores.size()), 0);
    bool any = false;
    for (Index n = 0; n < scores.size(); ++n)
        if (scores[n] >= tau) {
            bits[static_cast<std::size_t>(n)] = 1;
            any = true;
        }
    if (!any && scores.size() > 0) {
        Index best = 0;
        scores.maxCoeff(&best);
        bits[static_cast<std::size_t>(best)] = 1;
    }
    return bits;
}

EpisodePrediction predict_episode(const MatrixXd& prototypes, const std::vector<MatrixXd>& query_reps, double tau) {
    EpisodePrediction out;
    for (const auto& reps : query_reps) {
        if (reps.rows() != prototypes.rows() || reps.cols() != prototypes.cols())
            throw ValidationError("predict_episode: query representations do not match the prototypes");
        VectorXd dist = (prototypes - reps).colwise().norm().transpose();
        VectorXd scores = softmax(-dist);
        out.decisions.push_back(threshold_decide(scores, tau));
        out.distances.push_back(std::move(dist));
        out.scores.push_back(std::move(scores));
    }
    return out;
}

VectorXd normalized_gold(const LabelBits& gold) {
    VectorXd y(static_cast<Index>(gold.size()));
    for (std::size_t i = 0; i < gold.size(); ++i) y[static_cast<Index>(i)] = gold[i] ? 1.0 : 0.0;
    const double total = y.sum();
    if (total == 0.0) throw ValidationError("gold label vector has no set bit");
    return y / total;
}

double episode_loss(const EpisodePrediction& prediction, const std::vector<LabelBits>& gold) {
    if (prediction.scores.size() != gold.size()) throw ValidationError("episode_loss: one gold vector per query");
    double loss = 0.0;
    for (std::size_t m = 0; m < gold.size(); ++m) {
        const auto y = normalized_gold(gold[m]);
        if (y.size() != prediction.scores[m].size()) throw ValidationError("episode_loss: gold width differs from N");
        loss += (prediction.scores[m] - y).squaredNorm();
    }
    return loss;
}

LossGradient episode_loss_gradient(const MatrixXd& prototypes, const std::vector<MatrixXd>& query_reps,
                                   const std::vector<LabelBits>& gold) {
    if (query_reps.size() != gold.size()) throw ValidationError("episode_loss_gradient: one gold vector per query");
    LossGradient g;
    g.d_prototypes = MatrixXd::Zero(prototypes.rows(), prototypes.cols());
    for (std::size_t m = 0; m < gold.size(); ++m) {
        const auto& reps = query_reps[m];
        const MatrixXd diff = prototypes - reps;
        const VectorXd dist = diff.colwise().norm().transpose();
        const VectorXd yhat = softmax(-dist);
        const VectorXd y = normalized_gold(gold[m]);
        g.loss += (yhat - y).squaredNorm();
        const VectorXd dyhat = 2.0 * (yhat - y);
        const VectorXd dz = yhat.cwiseProduct((dyhat.array() - yhat.dot(dyhat)).matrix());
        MatrixXd d_rep = MatrixXd::Zero(reps.rows(), reps.cols());
        for (Index n = 0; n < dist.size(); ++n) {
            if (dist[n] == 0.0) continue;
            const VectorXd unit = diff.col(n) / dist[n];
            g.d_prototypes.col(n) -= dz[n] * unit;  // d dist = unit . dp, d z = -d dist
            d_rep.col(n) += dz[n] * unit;
        }
        g.d_reps.push_back(std::move(d_rep));
    }
    return g;
}

std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size()) throw ValidationError("roc_auc: scores and labels differ in length");
    const auto n = scores.size();
    const auto positives = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto b) { return b != 0; }));
    const auto negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double positive_rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]]) positive_rank_sum += avg_rank;
        i = j + 1;
    }
    return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double macro_f1(const std::vector<LabelBits>& decisions, const std::vector<LabelBits>& gold) {
    if (decisions.size() != gold.size() || gold.empty()) throw ValidationError("macro_f1: mismatched or empty input");
    const auto N = gold.front().size();
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t m = 0; m < gold.size(); ++m) {
            const bool pred = decisions[m].at(n) != 0, truth = gold[m].at(n) != 0;
            tp += pred && truth;
            fp += pred && !truth;
            fn += !pred && truth;
        }
        if (tp > 0) total += 2.0 * tp / (2.0 * tp + fp + fn);
    }
    return total / static_cast<double>(N);
}

std::optional<double> episode_auc(const std::vector<VectorXd>& scores, const std::vector<LabelBits>& gold, AucMode mode) {
    if (scores.size() != gold.size()) throw ValidationError("episode_auc: one gold vector per query");
    if (mode == AucMode::pooled) {
        std::vector<double> s;
        std::vector<std::uint8_t> l;
        for (std::size_t m = 0; m < scores.size(); ++m)
            for (Index n = 0; n < scores[m].size(); ++n) {
                s.push_back(scores[m][n]);
                l.push_back(gold[m].at(static_cast<std::size_t>(n)));
            }
        return roc_auc(s, l);
    }
    if (gold.empty()) return std::nullopt;
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t n = 0; n < gold.front().size(); ++n) {
        std::vector<double> s;
        std::vector<std::uint8_t> l;
        for (std::size_t m = 0; m < scores.size(); ++m) {
            s.push_back(scores[m][static_cast<Index>(n)]);
            l.push_back(gold[m][n]);
        }
        if (auto a = roc_auc(s, l)) {
            total += *a;
            ++counted;
        }
    }
    if (counted == 0) return std::nullopt;
    return total / static_cast<double>(counted);
}

}  // namespace slwla
