#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slwla/encoder.hpp"
#include "slwla/rng.hpp"

namespace slwla {

/// Trainable maps of the attention pipeline.
///   W (d x e_M), b (d):      dynamic word-attention matrix  W^n = W (v repeated e_M times) + b
///   W_g = (w_alpha, w_beta), b_g: per-token fusion of label and word scores
///   W_s (d x e_M), b_s (d):  dynamic sentence-attention matrix from the shortest sentence
struct ModelParams {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    Eigen::Vector2d W_g = Eigen::Vector2d::Zero();
    double b_g = 0.0;
    Eigen::MatrixXd W_s;
    Eigen::VectorXd b_s;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(b.size()); }
    std::size_t repeat() const noexcept { return static_cast<std::size_t>(W.cols()); }

    static ModelParams zeros(std::size_t dim, std::size_t repeat);
    /// Uniform(-1/sqrt(d), 1/sqrt(d)) weights, zero biases.
    static ModelParams initialize(std::size_t dim, std::size_t repeat, Rng& rng);

    bool all_finite() const;

    struct TensorView {
        std::string name;
        double* data;
        std::size_t size;
    };
    /// Views in the fixed order W, b, W_g, b_g, W_s, b_s.
    std::vector<TensorView> tensors();
    std::vector<std::pair<std::string, std::size_t>> shapes() const;

    ModelParams& operator+=(const ModelParams& other);
    ModelParams& operator*=(double scale);
};

enum class Variant { proto, slw, slw_las, slwla };

const char* to_string(Variant v) noexcept;
Variant parse_variant(const std::string& name);
bool uses_label_guidance(Variant v) noexcept;

struct ForwardOptions {
    Variant variant = Variant::slwla;
    bool uniform_sentence_weights = false;
};

/// Numerically stable softmax; callers pass scores for valid positions only.
Eigen::VectorXd softmax(const Eigen::VectorXd& scores);
Eigen::VectorXd masked_mean(const EmbeddingMatrix& h);

/// Mean over valid tokens per instance, then mean over instances.
Eigen::VectorXd common_aspect_vector(std::span<const EmbeddingMatrix> instances);

/// W (v repeated e_M times as an e_M x d block) + b broadcast to every column.
Eigen::MatrixXd dynamic_attention_matrix(const Eigen::VectorXd& v, const Eigen::MatrixXd& W,
                                         const Eigen::VectorXd& b);

/// softmax_i(v . tanh(Wn h_i)) over the valid tokens of h.
Eigen::VectorXd word_attention(const Eigen::VectorXd& v, const Eigen::MatrixXd& Wn, const EmbeddingMatrix& h);

/// cos(label, h_i) over valid tokens; zero-norm columns score 0.
Eigen::VectorXd label_guided_scores(const Eigen::VectorXd& label, const EmbeddingMatrix& h);

/// softmax_i(w_alpha * alpha_i + w_beta * beta_i + b_g).
Eigen::VectorXd fuse_attention(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                               const Eigen::Vector2d& W_g, double b_g);

/// sum_i theta_i h_i over valid tokens.
Eigen::VectorXd denoise(const Eigen::VectorXd& theta, const EmbeddingMatrix& h);

/// Index of the smallest length, lowest index on ties.
std::size_t shortest_index(std::span<const std::size_t> lengths);

struct SentenceWeights {
    Eigen::VectorXd gamma;
    std::size_t anchor = 0;  // column of the shortest sentence
    Eigen::MatrixXd Ws;      // d x d dynamic matrix
    Eigen::VectorXd scores;  // pre-softmax
};

/// gamma = softmax_k(r_min . tanh(Ws r_k)), Ws = W_s (r_min repeated) + b_s; R is d x K.
SentenceWeights sentence_attention(const Eigen::MatrixXd& R, std::span<const std::size_t> lengths,
                                   const Eigen::MatrixXd& W_s, const Eigen::VectorXd& b_s);

/// sum_k gamma_k R.col(k).
Eigen::VectorXd prototype(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& R);

struct QueryAttention {
    Eigen::VectorXd weights;         // over valid tokens
    Eigen::VectorXd representation;  // d
};

/// weights = softmax_i(p . tanh(h_i)), representation = sum_i weights_i h_i.
QueryAttention query_representation(const Eigen::VectorXd& p, const EmbeddingMatrix& h);

/// Encoder outputs for one episode.
struct EpisodeInputs {
    std::vector<std::vector<EmbeddingMatrix>> support;  // N x K
    std::vector<EmbeddingMatrix> queries;               // M
    std::vector<Eigen::VectorXd> labels;                // N label-text embeddings (label-guided variants)

    std::size_t way() const noexcept { return support.size(); }
    std::size_t dim() const;
};

struct ClassTrace {
    Eigen::VectorXd v;
    Eigen::MatrixXd Wn;
    std::vector<Eigen::VectorXd> beta;         // word attention per sentence
    std::vector<Eigen::VectorXd> alpha;        // label cosine per sentence (label-guided only)
    std::vector<Eigen::VectorXd> theta_tilde;  // final word weights per sentence
    Eigen::MatrixXd R;                         // d x K denoised representations
    std::vector<std::size_t> lengths;
    SentenceWeights sentence;
    Eigen::VectorXd p;
};

struct QueryTrace {
    Eigen::MatrixXd tanh_h;                // d x l, tanh of valid columns
    std::vector<Eigen::VectorXd> weights;  // per class
    Eigen::MatrixXd reps;                  // d x N
};

/// Every intermediate of one forward pass. Prototypes are the columns of `prototypes`.
struct ForwardTrace {
    std::vector<ClassTrace> classes;
    std::vector<QueryTrace> queries;
    Eigen::MatrixXd prototypes;  // d x N

    Eigen::MatrixXd gammas() const;  // K x N
};

ForwardTrace forward_episode(const EpisodeInputs& inputs, const ModelParams& params,
                             const ForwardOptions& options);

/// Gradients of a scalar loss with respect to the parameters, given the loss gradients
/// d loss / d prototypes (d x N) and d loss / d query reps (one d x N block per query).
ModelParams backward_episode(const EpisodeInputs& inputs, const ModelParams& params,
                             const ForwardOptions& options, const ForwardTrace& trace,
                             const Eigen::MatrixXd& d_prototypes,
                             const std::vector<Eigen::MatrixXd>& d_reps);

}  // namespace slwla
