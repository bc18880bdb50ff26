#include "slwla/attention.hpp"

#include <algorithm>
#include <cmath>

#include "slwla/error.hpp"

namespace slwla {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

void require_valid(const EmbeddingMatrix& h) {
    require(h.valid_len >= 1 && h.valid_len <= h.max_len(), "embedding matrix with valid_len outside [1, L]");
}

// Backprop through y = softmax(x): dx = y * (dy - <y, dy>).
VectorXd softmax_backward(const VectorXd& y, const VectorXd& dy) {
    return y.cwiseProduct((dy.array() - y.dot(dy)).matrix());
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

ModelParams ModelParams::zeros(std::size_t dim, std::size_t repeat) {
    if (dim == 0 || repeat == 0) throw ConfigError("model dimensions must be positive");
    ModelParams p;
    p.W = MatrixXd::Zero(idx(dim), idx(repeat));
    p.b = VectorXd::Zero(idx(dim));
    p.W_s = MatrixXd::Zero(idx(dim), idx(repeat));
    p.b_s = VectorXd::Zero(idx(dim));
    return p;
}

ModelParams ModelParams::initialize(std::size_t dim, std::size_t repeat, Rng& rng) {
    auto p = zeros(dim, repeat);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& x : p.W.reshaped()) x = u(rng);
    for (auto& x : p.W_g) x = u(rng);
    for (auto& x : p.W_s.reshaped()) x = u(rng);
    return p;
}

bool ModelParams::all_finite() const {
    return W.allFinite() && b.allFinite() && W_g.allFinite() && std::isfinite(b_g) && W_s.allFinite() &&
           b_s.allFinite();
}

std::vector<ModelParams::TensorView> ModelParams::tensors() {
    return {{"W", W.data(), static_cast<std::size_t>(W.size())},
            {"b", b.data(), static_cast<std::size_t>(b.size())},
            {"W_g", W_g.data(), 2},
            {"b_g", &b_g, 1},
            {"W_s", W_s.data(), static_cast<std::size_t>(W_s.size())},
            {"b_s", b_s.data(), static_cast<std::size_t>(b_s.size())}};
}

std::vector<std::pair<std::string, std::size_t>> ModelParams::shapes() const {
    auto copy = *this;
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& t : copy.tensors()) out.emplace_back(t.name, t.size);
    return out;
}

ModelParams& ModelParams::operator+=(const ModelParams& o) {
    W += o.W;
    b += o.b;
    W_g += o.W_g;
    b_g += o.b_g;
    W_s += o.W_s;
    b_s += o.b_s;
    return *this;
}

ModelParams& ModelParams::operator*=(double s) {
    W *= s;
    b *= s;
    W_g *= s;
    b_g *= s;
    W_s *= s;
    b_s *= s;
    return *this;
}

const char* to_string(Variant v) noexcept {
    switch (v) {
        case Variant::proto: return "proto";
        case Variant::slw: return "slw";
        case Variant::slw_las: return "slw-las";
        case Variant::slwla: return "slwla";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    if (name == "proto") return Variant::proto;
    if (name == "slw") return Variant::slw;
    if (name == "slw-las" || name == "slw_las") return Variant::slw_las;
    if (name == "slwla") return Variant::slwla;
    throw ConfigError("unknown ablation '" + name + "' (expected proto, slw, slw-las or slwla)");
}

bool uses_label_guidance(Variant v) noexcept { return v == Variant::slw_las || v == Variant::slwla; }

// ---------------------------------------------------------------------------
// Building blocks

VectorXd softmax(const VectorXd& scores) {
    require(scores.size() > 0, "softmax over an empty score vector");
    VectorXd e = (scores.array() - scores.maxCoeff()).exp();
    return e / e.sum();
}

VectorXd masked_mean(const EmbeddingMatrix& h) {
    require_valid(h);
    return h.valid().rowwise().mean();
}

VectorXd common_aspect_vector(std::span<const EmbeddingMatrix> instances) {
    require(!instances.empty(), "common_aspect_vector needs at least one instance");
    const auto d = instances.front().dim();
    VectorXd v = VectorXd::Zero(idx(d));
    for (const auto& h : instances) {
        require(h.dim() == d, "instances disagree on embedding dimension");
        v += masked_mean(h);
    }
    return v / static_cast<double>(instances.size());
}

MatrixXd dynamic_attention_matrix(const VectorXd& v, const MatrixXd& W, const VectorXd& b) {
    require(W.rows() == v.size() && b.size() == v.size() && W.cols() >= 1,
            "dynamic_attention_matrix: W must be d x e_M and b, v of length d");
    const MatrixXd repeated = VectorXd::Ones(W.cols()) * v.transpose();  // e_M x d
    MatrixXd out = W * repeated;
    out.colwise() += b;
    return out;
}

VectorXd word_attention(const VectorXd& v, const MatrixXd& Wn, const EmbeddingMatrix& h) {
    require_valid(h);
    require(Wn.rows() == v.size() && Wn.cols() == idx(h.dim()), "word_attention: shape mismatch");
    const MatrixXd t = (Wn * h.valid()).array().tanh().matrix();
    return softmax(t.transpose() * v);
}

VectorXd label_guided_scores(const VectorXd& label, const EmbeddingMatrix& h) {
    require_valid(h);
    require(label.size() == idx(h.dim()), "label_guided_scores: dimension mismatch");
    const double label_norm = label.norm();
    require(label_norm > 0.0, "label_guided_scores: zero label embedding");
    VectorXd alpha(idx(h.valid_len));
    for (Index i = 0; i < alpha.size(); ++i) {
        const double n = h.values.col(i).norm();
        alpha[i] = n > 0.0 ? label.dot(h.values.col(i)) / (label_norm * n) : 0.0;
    }
    return alpha;
}

VectorXd fuse_attention(const VectorXd& alpha, const VectorXd& beta, const Eigen::Vector2d& W_g, double b_g) {
    require(alpha.size() == beta.size(), "fuse_attention: alpha and beta lengths differ");
    return softmax((W_g[0] * alpha + W_g[1] * beta).array() + b_g);
}

VectorXd denoise(const VectorXd& theta, const EmbeddingMatrix& h) {
    require_valid(h);
    require(theta.size() == idx(h.valid_len), "denoise: weight length differs from valid_len");
    return h.valid() * theta;
}

std::size_t shortest_index(std::span<const std::size_t> lengths) {
    require(!lengths.empty(), "shortest_index of an empty class");
    return static_cast<std::size_t>(std::min_element(lengths.begin(), lengths.end()) - lengths.begin());
}

SentenceWeights sentence_attention(const MatrixXd& R, std::span<const std::size_t> lengths, const MatrixXd& W_s,
                                   const VectorXd& b_s) {
    require(R.cols() >= 1, "sentence_attention on an empty class");
    require(static_cast<Index>(lengths.size()) == R.cols(), "sentence_attention: one length per sentence");
    SentenceWeights out;
    out.anchor = shortest_index(lengths);
    const VectorXd r_min = R.col(idx(out.anchor));
    out.Ws = dynamic_attention_matrix(r_min, W_s, b_s);
    const MatrixXd t = (out.Ws * R).array().tanh().matrix();
    out.scores = t.transpose() * r_min;
    out.gamma = softmax(out.scores);
    return out;
}

VectorXd prototype(const VectorXd& gamma, const MatrixXd& R) {
    require(gamma.size() == R.cols(), "prototype: one weight per representation");
    return R * gamma;
}

QueryAttention query_representation(const VectorXd& p, const EmbeddingMatrix& h) {
    require_valid(h);
    require(p.size() == idx(h.dim()), "query_representation: dimension mismatch");
    QueryAttention out;
    out.weights = softmax(h.valid().array().tanh().matrix().transpose() * p);
    out.representation = h.valid() * out.weights;
    return out;
}

// ---------------------------------------------------------------------------
// Episode composition

std::size_t EpisodeInputs::dim() const {
    require(!support.empty() && !support.front().empty(), "episode without support sentences");
    return support.front().front().dim();
}

MatrixXd ForwardTrace::gammas() const {
    if (classes.empty()) return {};
    MatrixXd out(classes.front().sentence.gamma.size(), idx(classes.size()));
    for (std::size_t n = 0; n < classes.size(); ++n) out.col(idx(n)) = classes[n].sentence.gamma;
    return out;
}

namespace {

void check_inputs(const EpisodeInputs& in, const ModelParams& params, const ForwardOptions& options) {
    const auto d = in.dim();
    const auto K = in.support.front().size();
    for (const auto& cls : in.support) {
        require(cls.size() == K, "support classes differ in K");
        for (const auto& h : cls) {
            require(h.dim() == d, "support embedding dimension mismatch");
            require_valid(h);
        }
    }
    for (const auto& h : in.queries) {
        require(h.dim() == d, "query embedding dimension mismatch");
        require_valid(h);
    }
    if (options.variant != Variant::proto)
        require(params.dim() == d && params.W_s.rows() == idx(d), "parameters built for another dimension");
    if (uses_label_guidance(options.variant)) {
        require(in.labels.size() == in.way(), "label-guided attention needs one label embedding per class");
        for (const auto& l : in.labels) require(l.size() == idx(d), "label embedding dimension mismatch");
    }
}

}  // namespace

ForwardTrace forward_episode(const EpisodeInputs& in, const ModelParams& params, const ForwardOptions& options) {
    check_inputs(in, params, options);
    const auto N = in.way();
    const auto K = in.support.front().size();
    const auto d = in.dim();
    const bool attend = options.variant != Variant::proto;
    const bool guided = uses_label_guidance(options.variant);

    ForwardTrace trace;
    trace.classes.resize(N);
    trace.prototypes.resize(idx(d), idx(N));
    for (std::size_t n = 0; n < N; ++n) {
        auto& c = trace.classes[n];
        const auto& sentences = in.support[n];
        c.v = common_aspect_vector(sentences);
        c.R.resize(idx(d), idx(K));
        if (attend) c.Wn = dynamic_attention_matrix(c.v, params.W, params.b);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& h = sentences[k];
            c.lengths.push_back(h.valid_len);
            if (!attend) {
                c.theta_tilde.push_back(VectorXd::Constant(idx(h.valid_len), 1.0 / static_cast<double>(h.valid_len)));
            } else {
                c.beta.push_back(word_attention(c.v, c.Wn, h));
                if (guided) {
                    c.alpha.push_back(label_guided_scores(in.labels[n], h));
                    c.theta_tilde.push_back(fuse_attention(c.alpha.back(), c.beta.back(), params.W_g, params.b_g));
                } else {
                    c.theta_tilde.push_back(c.beta.back());
                }
            }
            c.R.col(idx(k)) = denoise(c.theta_tilde.back(), h);
        }
        if (attend) {
            c.sentence = sentence_attention(c.R, c.lengths, params.W_s, params.b_s);
        } else {
            c.sentence.anchor = shortest_index(c.lengths);
        }
        if (!attend || options.uniform_sentence_weights)
            c.sentence.gamma = VectorXd::Constant(idx(K), 1.0 / static_cast<double>(K));
        c.p = prototype(c.sentence.gamma, c.R);
        trace.prototypes.col(idx(n)) = c.p;
    }

    trace.queries.resize(in.queries.size());
    for (std::size_t m = 0; m < in.queries.size(); ++m) {
        const auto& h = in.queries[m];
        auto& q = trace.queries[m];
        q.reps.resize(idx(d), idx(N));
        if (!attend) {
            const VectorXd mean = masked_mean(h);
            for (std::size_t n = 0; n < N; ++n) {
                q.weights.push_back(VectorXd::Constant(idx(h.valid_len), 1.0 / static_cast<double>(h.valid_len)));
                q.reps.col(idx(n)) = mean;
            }
            continue;
        }
        q.tanh_h = h.valid().array().tanh().matrix();
        for (std::size_t n = 0; n < N; ++n) {
            VectorXd w = softmax(q.tanh_h.transpose() * trace.classes[n].p);
            q.reps.col(idx(n)) = h.valid() * w;
            q.weights.push_back(std::move(w));
        }
    }
    return trace;
}

ModelParams backward_episode(const EpisodeInputs& in, const ModelParams& params, const ForwardOptions& options,
                             const ForwardTrace& trace, const MatrixXd& d_prototypes,
                             const std::vector<MatrixXd>& d_reps) {
    const auto N = in.way();
    const auto d = in.dim();
    ModelParams grad = params;
    grad.W.setZero();
    grad.b.setZero();
    grad.W_g.setZero();
    grad.b_g = 0.0;
    grad.W_s.setZero();
    grad.b_s.setZero();
    if (options.variant == Variant::proto) return grad;
    require(d_prototypes.rows() == idx(d) && d_prototypes.cols() == idx(N), "d_prototypes shape mismatch");
    require(d_reps.size() == in.queries.size(), "one d_reps block per query");
    const bool guided = uses_label_guidance(options.variant);

    // Query attention: rep = H w, w = softmax(tanh(H)^T p).
    MatrixXd dp = d_prototypes;
    for (std::size_t m = 0; m < in.queries.size(); ++m) {
        const auto& q = trace.queries[m];
        const auto hv = in.queries[m].valid();
        for (std::size_t n = 0; n < N; ++n) {
            const VectorXd dw = hv.transpose() * d_reps[m].col(idx(n));
            dp.col(idx(n)) += q.tanh_h * softmax_backward(q.weights[n], dw);
        }
    }

    for (std::size_t n = 0; n < N; ++n) {
        const auto& c = trace.classes[n];
        const auto K = static_cast<std::size_t>(c.R.cols());
        const VectorXd& gamma = c.sentence.gamma;

        // p = R gamma
        MatrixXd dR = dp.col(idx(n)) * gamma.transpose();
        if (!options.uniform_sentence_weights) {
            const VectorXd dgamma = c.R.transpose() * dp.col(idx(n));
            const VectorXd dc = softmax_backward(gamma, dgamma);
            // c_k = r_min . tanh(Ws r_k)
            const VectorXd r_min = c.R.col(idx(c.sentence.anchor));
            const MatrixXd T = (c.sentence.Ws * c.R).array().tanh().matrix();
            VectorXd dr_min = T * dc;
            const MatrixXd dA = ((r_min * dc.transpose()).array() * (1.0 - T.array().square())).matrix();
            const MatrixXd dWs = dA * c.R.transpose();
            dR += c.sentence.Ws.transpose() * dA;
            // Ws = W_s (r_min repeated) + b_s
            const VectorXd dWs_r = dWs * r_min;
            for (Index e = 0; e < grad.W_s.cols(); ++e) grad.W_s.col(e) += dWs_r;
            grad.b_s += dWs.rowwise().sum();
            dr_min += dWs.transpose() * params.W_s.rowwise().sum();
            dR.col(idx(c.sentence.anchor)) += dr_min;
        }

        MatrixXd dWn = MatrixXd::Zero(idx(d), idx(d));
        for (std::size_t k = 0; k < K; ++k) {
            const auto& h = in.support[n][k];
            const auto hv = h.valid();
            const VectorXd dtheta_tilde = hv.transpose() * dR.col(idx(k));
            VectorXd dbeta;
            if (guided) {
                const VectorXd dtheta = softmax_backward(c.theta_tilde[k], dtheta_tilde);
                grad.W_g[0] += dtheta.dot(c.alpha[k]);
                grad.W_g[1] += dtheta.dot(c.beta[k]);
                grad.b_g += dtheta.sum();
                dbeta = params.W_g[1] * dtheta;
            } else {
                dbeta = dtheta_tilde;
            }
            // beta = softmax(tanh(Wn H)^T v)
            const VectorXd ds = softmax_backward(c.beta[k], dbeta);
            const MatrixXd T = (c.Wn * hv).array().tanh().matrix();
            const MatrixXd dA = ((c.v * ds.transpose()).array() * (1.0 - T.array().square())).matrix();
            dWn += dA * hv.transpose();
        }
        // Wn = W (v repeated) + b
        const VectorXd dWn_v = dWn * c.v;
        for (Index e = 0; e < grad.W.cols(); ++e) grad.W.col(e) += dWn_v;
        grad.b += dWn.rowwise().sum();
    }
    return grad;
}

}  // namespace slwla
