#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace slwla {

/// d x L token embeddings; columns at positions >= valid_len are zero.
struct EmbeddingMatrix {
    Eigen::MatrixXd values;
    std::size_t valid_len = 0;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t max_len() const noexcept { return static_cast<std::size_t>(values.cols()); }

    auto valid() const { return values.leftCols(static_cast<Eigen::Index>(valid_len)); }
    Eigen::VectorXd column(std::size_t i) const { return values.col(static_cast<Eigen::Index>(i)); }

    /// Zero-pads the given d x l columns out to d x max_len.
    static EmbeddingMatrix from_columns(const Eigen::MatrixXd& columns, std::size_t max_len);
};

struct MlmCandidate {
    std::string word;
    double probability = 0.0;
};

/// Mask-position distribution over an encoder-owned vocabulary.
struct MlmDistribution {
    std::vector<double> probabilities;
    const std::vector<std::string>* vocabulary = nullptr;
};

/// A pretrained masked-language-model encoder. Implementations are read-shareable.
class Encoder {
public:
    virtual ~Encoder() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::size_t max_len() const = 0;
    virtual bool trainable() const { return false; }
    virtual std::string mask_token() const { return "[MASK]"; }

    /// Word-level tokens, special boundary tokens excluded.
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;

    /// Tokenises, truncates to L and zero-pads. Throws ValidationError on empty input.
    virtual EmbeddingMatrix embed_tokens(std::string_view text) const = 0;

    /// Mean over the valid columns of embed_tokens(label_text).
    Eigen::VectorXd embed_label_text(std::string_view label_text) const;

    /// Throws ValidationError unless the prompt holds exactly one mask token.
    virtual MlmDistribution mlm_distribution(std::string_view prompt) const = 0;

    /// Top `top_k` single-token whole-word candidates by descending probability
    /// (ties by word). Throws ValidationError for top_k == 0 or a bad mask count.
    std::vector<MlmCandidate> mlm_predict(std::string_view prompt, std::size_t top_k) const;

protected:
    virtual bool is_whole_word(const std::string& vocab_entry) const;
    void check_single_mask(std::string_view prompt) const;
};

/// Trigger token -> (predicted word -> score boost) rigging for the mock MLM head.
using MlmRig = std::map<std::string, std::map<std::string, double>>;

MlmRig load_mlm_rig(const std::filesystem::path& path);

/// Deterministic stand-in encoder. Token t maps to the unit vector obtained by normalising
/// d uniform(-1, 1) draws from splitmix64 seeded with (seed XOR fnv1a64(t)), so distinct tokens
/// are near-orthogonal at large d. The MLM head scores each vocabulary word as
/// base(w) + sum of rig boosts triggered by prompt tokens + copy_bonus if w occurs in the prompt.
class MockEncoder final : public Encoder {
public:
    MockEncoder(std::uint64_t seed, std::size_t dim, std::size_t max_len, MlmRig rig = {},
                std::vector<std::string> extra_vocabulary = {});

    std::string id() const override;
    std::size_t dim() const override { return dim_; }
    std::size_t max_len() const override { return max_len_; }

    std::vector<std::string> tokenize(std::string_view text) const override;
    EmbeddingMatrix embed_tokens(std::string_view text) const override;
    MlmDistribution mlm_distribution(std::string_view prompt) const override;

    Eigen::VectorXd token_vector(std::string_view token) const;
    double base_score(std::string_view word) const;
    const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
    std::uint64_t seed() const noexcept { return seed_; }

    static constexpr double copy_bonus = 1.0;

private:
    std::uint64_t seed_;
    std::size_t dim_;
    std::size_t max_len_;
    MlmRig rig_;
    std::vector<std::string> vocabulary_;
};

struct EncoderOptions {
    std::string name = "mock:0";
    std::size_t dim = 768;
    std::size_t max_len = 50;
    std::filesystem::path mlm_rig;  // mock only; empty for none
};

/// Resolves an encoder by name. "mock:<seed>" selects MockEncoder; any other name throws
/// EnvironmentError since no pretrained backend is linked into this build.
std::unique_ptr<Encoder> make_encoder(const EncoderOptions& options);

/// Persistent embedding store keyed by (encoder id, fnv1a64(text)).
///
/// File layout (little-endian): "SLWLAEMB", u32 version, u64 entry count, then per entry
/// u32 id length, id bytes, u64 text hash, u32 d, u32 L, u32 valid_len, and d*valid_len f64
/// values of the valid columns in column-major order.
class EmbeddingCache {
public:
    static constexpr std::uint32_t format_version = 1;

    const EmbeddingMatrix* find(const std::string& encoder_id, std::string_view text) const;
    void insert(const std::string& encoder_id, std::string_view text, EmbeddingMatrix embedding);
    std::size_t size() const noexcept { return entries_.size(); }

    void save(const std::filesystem::path& path) const;
    static EmbeddingCache load(const std::filesystem::path& path);

private:
    std::map<std::pair<std::string, std::uint64_t>, EmbeddingMatrix> entries_;
};

/// Encoder decorator that consults and fills an EmbeddingCache.
class CachingEncoder final : public Encoder {
public:
    explicit CachingEncoder(std::shared_ptr<const Encoder> inner, EmbeddingCache cache = {});

    std::string id() const override { return inner_->id(); }
    std::size_t dim() const override { return inner_->dim(); }
    std::size_t max_len() const override { return inner_->max_len(); }
    bool trainable() const override { return inner_->trainable(); }
    std::string mask_token() const override { return inner_->mask_token(); }
    std::vector<std::string> tokenize(std::string_view text) const override { return inner_->tokenize(text); }
    EmbeddingMatrix embed_tokens(std::string_view text) const override;
    MlmDistribution mlm_distribution(std::string_view prompt) const override {
        return inner_->mlm_distribution(prompt);
    }

    EmbeddingCache snapshot() const;

private:
    std::shared_ptr<const Encoder> inner_;
    mutable std::mutex mutex_;
    mutable EmbeddingCache cache_;
};

}  // namespace slwla
