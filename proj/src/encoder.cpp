#include "slwla/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "slwla/error.hpp"
#include "slwla/hash.hpp"
#include "slwla/rng.hpp"

namespace slwla {

EmbeddingMatrix EmbeddingMatrix::from_columns(const Eigen::MatrixXd& columns, std::size_t max_len) {
    EmbeddingMatrix out;
    const auto l = std::min<std::size_t>(static_cast<std::size_t>(columns.cols()), max_len);
    out.values = Eigen::MatrixXd::Zero(columns.rows(), static_cast<Eigen::Index>(max_len));
    out.values.leftCols(static_cast<Eigen::Index>(l)) = columns.leftCols(static_cast<Eigen::Index>(l));
    out.valid_len = l;
    return out;
}

Eigen::VectorXd Encoder::embed_label_text(std::string_view label_text) const {
    if (label_text.empty()) throw ValidationError("empty label text");
    const auto h = embed_tokens(label_text);
    return h.valid().rowwise().mean();
}

bool Encoder::is_whole_word(const std::string& vocab_entry) const {
    if (vocab_entry.empty() || vocab_entry.rfind("##", 0) == 0) return false;
    return !(vocab_entry.front() == '[' && vocab_entry.back() == ']');
}

void Encoder::check_single_mask(std::string_view prompt) const {
    const auto mask = mask_token();
    std::size_t count = 0;
    for (auto pos = prompt.find(mask); pos != std::string_view::npos; pos = prompt.find(mask, pos + mask.size()))
        ++count;
    if (count != 1)
        throw ValidationError("prompt must contain exactly one " + mask + " token, found " + std::to_string(count));
}

std::vector<MlmCandidate> Encoder::mlm_predict(std::string_view prompt, std::size_t top_k) const {
    if (top_k == 0) throw ValidationError("top_k must be at least 1");
    const auto dist = mlm_distribution(prompt);
    const auto& vocab = *dist.vocabulary;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (is_whole_word(vocab[i])) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist.probabilities[a] != dist.probabilities[b]) return dist.probabilities[a] > dist.probabilities[b];
        return vocab[a] < vocab[b];
    });
    order.resize(std::min(order.size(), top_k));
    std::vector<MlmCandidate> out;
    for (auto i : order) out.push_back({vocab[i], dist.probabilities[i]});
    return out;
}

MlmRig load_mlm_rig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot read MLM rig file '" + path.string() + "'");
    MlmRig rig;
    try {
        const auto doc = nlohmann::json::parse(in);
        for (const auto& [trigger, boosts] : doc.items())
            for (const auto& [word, score] : boosts.items()) rig[trigger][word] = score.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    return rig;
}

namespace {

// Vocabulary of the mock MLM head before rig words are added. Includes function words,
// punctuation and subword pieces so downstream filtering has something to remove.
const std::vector<std::string>& base_vocabulary() {
    static const std::vector<std::string> vocab = {
        "the", "a", "an", "and", "or", "it", "is", "was", "this", "that", "of", "to", "in",
        "for", "with", "on", "at", "very", "so", ".", ",", "!", "?", "-", "'", "##s", "##ing",
        "[UNK]", "good", "great", "nice", "place", "thing", "time", "food", "service", "staff",
        "price", "experience", "drinks", "atmosphere", "meal", "delicious", "eat", "friendly",
        "fast", "cheap", "music", "parking", "location", "room", "quality", "taste", "value"};
    return vocab;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

MockEncoder::MockEncoder(std::uint64_t seed, std::size_t dim, std::size_t max_len, MlmRig rig,
                         std::vector<std::string> extra_vocabulary)
    : seed_(seed), dim_(dim), max_len_(max_len), rig_(std::move(rig)) {
    if (dim_ == 0 || max_len_ == 0) throw ConfigError("encoder dimensions must be positive");
    std::set<std::string> vocab(base_vocabulary().begin(), base_vocabulary().end());
    for (const auto& [trigger, boosts] : rig_)
        for (const auto& [word, score] : boosts) vocab.insert(word);
    vocab.insert(extra_vocabulary.begin(), extra_vocabulary.end());
    vocabulary_.assign(vocab.begin(), vocab.end());
}

std::string MockEncoder::id() const {
    std::string out = "mock:" + std::to_string(seed_) + "/d" + std::to_string(dim_) + "/L" + std::to_string(max_len_);
    if (!rig_.empty()) out += "/rig" + std::to_string(fnv1a64(nlohmann::json(rig_).dump()) & 0xffffffffULL);
    return out;
}

std::vector<std::string> MockEncoder::tokenize(std::string_view text) const {
    const auto mask = mask_token();
    std::vector<std::string> tokens;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) tokens.push_back(std::move(word));
        word.clear();
    };
    for (std::size_t i = 0; i < text.size();) {
        if (text.compare(i, mask.size(), mask) == 0) {
            flush();
            tokens.push_back(mask);
            i += mask.size();
            continue;
        }
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_word_byte(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
            if (!std::isspace(c) && c != '_') tokens.emplace_back(1, static_cast<char>(c));
        }
        ++i;
    }
    flush();
    return tokens;
}

Eigen::VectorXd MockEncoder::token_vector(std::string_view token) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
    std::uint64_t state = seed_ ^ fnv1a64(token);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        state = mix64(state);
        v[j] = static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    return v / v.norm();
}

EmbeddingMatrix MockEncoder::embed_tokens(std::string_view text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw ValidationError("text '" + std::string(text) + "' has no tokens");
    const auto l = std::min(tokens.size(), max_len_);
    EmbeddingMatrix out;
    out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(max_len_));
    for (std::size_t i = 0; i < l; ++i) out.values.col(static_cast<Eigen::Index>(i)) = token_vector(tokens[i]);
    out.valid_len = l;
    return out;
}

double MockEncoder::base_score(std::string_view word) const {
    const auto h = mix64(seed_ ^ fnv1a64(word) ^ 0xa5a5a5a5a5a5a5a5ULL);
    return 0.5 * static_cast<double>(h >> 11) * 0x1.0p-53;
}

MlmDistribution MockEncoder::mlm_distribution(std::string_view prompt) const {
    check_single_mask(prompt);
    const auto tokens = tokenize(prompt);
    const std::set<std::string> present(tokens.begin(), tokens.end());

    std::vector<double> scores(vocabulary_.size());
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
        const auto& w = vocabulary_[i];
        double s = base_score(w);
        if (present.count(w)) s += copy_bonus;
        scores[i] = s;
    }
    for (const auto& t : tokens) {
        auto it = rig_.find(t);
        if (it == rig_.end()) continue;
        for (const auto& [word, boost] : it->second) {
            auto pos = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), word);
            scores[static_cast<std::size_t>(pos - vocabulary_.begin())] += boost;
        }
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (auto& s : scores) total += (s = std::exp(s - top));
    for (auto& s : scores) s /= total;
    return {std::move(scores), &vocabulary_};
}

std::unique_ptr<Encoder> make_encoder(const EncoderOptions& options) {
    const std::string prefix = "mock:";
    if (options.name.rfind(prefix, 0) == 0) {
        const auto digits = options.name.substr(prefix.size());
        std::uint64_t seed = 0;
        auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
        if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size())
            throw ConfigError("mock encoder name must be mock:<seed>, got '" + options.name + "'");
        MlmRig rig;
        if (!options.mlm_rig.empty()) rig = load_mlm_rig(options.mlm_rig);
        return std::make_unique<MockEncoder>(seed, options.dim, options.max_len, std::move(rig));
    }
    throw EnvironmentError("no encoder backend available for '" + options.name +
                           "'; this build ships only the mock:<seed> encoder");
}

// ---------------------------------------------------------------------------
// Embedding cache

namespace {

constexpr char cache_magic[8] = {'S', 'L', 'W', 'L', 'A', 'E', 'M', 'B'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& source) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw CompatibilityError("truncated embedding cache '" + source + "'");
    return value;
}

}  // namespace

const EmbeddingMatrix* EmbeddingCache::find(const std::string& encoder_id, std::string_view text) const {
    auto it = entries_.find({encoder_id, fnv1a64(text)});
    return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::insert(const std::string& encoder_id, std::string_view text, EmbeddingMatrix embedding) {
    entries_.insert_or_assign({encoder_id, fnv1a64(text)}, std::move(embedding));
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw EnvironmentError("cannot write embedding cache '" + path.string() + "'");
        out.write(cache_magic, sizeof cache_magic);
        put<std::uint32_t>(out, format_version);
        put<std::uint64_t>(out, entries_.size());
        for (const auto& [key, h] : entries_) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(key.first.size()));
            out.write(key.first.data(), static_cast<std::streamsize>(key.first.size()));
            put<std::uint64_t>(out, key.second);
            put<std::uint32_t>(out, static_cast<std::uint32_t>(h.dim()));
            put<std::uint32_t>(out, static_cast<std::uint32_t>(h.max_len()));
            put<std::uint32_t>(out, static_cast<std::uint32_t>(h.valid_len));
            const Eigen::MatrixXd valid = h.valid();
            out.write(reinterpret_cast<const char*>(valid.data()),
                      static_cast<std::streamsize>(valid.size() * sizeof(double)));
        }
    }
    std::filesystem::rename(tmp, path);
}

EmbeddingCache EmbeddingCache::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvironmentError("cannot read embedding cache '" + path.string() + "'");
    const auto source = path.string();
    char magic[sizeof cache_magic];
    if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, cache_magic))
        throw CompatibilityError("'" + source + "' is not an embedding cache");
    if (auto v = get<std::uint32_t>(in, source); v != format_version)
        throw CompatibilityError("embedding cache version " + std::to_string(v) + " is not supported");
    EmbeddingCache cache;
    const auto count = get<std::uint64_t>(in, source);
    for (std::uint64_t e = 0; e < count; ++e) {
        std::string id(get<std::uint32_t>(in, source), '\0');
        if (!in.read(id.data(), static_cast<std::streamsize>(id.size())))
            throw CompatibilityError("truncated embedding cache '" + source + "'");
        const auto hash = get<std::uint64_t>(in, source);
        const auto d = get<std::uint32_t>(in, source);
        const auto L = get<std::uint32_t>(in, source);
        const auto valid_len = get<std::uint32_t>(in, source);
        if (valid_len == 0 || valid_len > L || d == 0)
            throw CompatibilityError("embedding cache entry with bad shape header");
        Eigen::MatrixXd valid(d, valid_len);
        if (!in.read(reinterpret_cast<char*>(valid.data()), static_cast<std::streamsize>(valid.size() * sizeof(double))))
            throw CompatibilityError("truncated embedding cache '" + source + "'");
        cache.entries_.emplace(std::make_pair(std::move(id), hash), EmbeddingMatrix::from_columns(valid, L));
    }
    return cache;
}

CachingEncoder::CachingEncoder(std::shared_ptr<const Encoder> inner, EmbeddingCache cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

EmbeddingMatrix CachingEncoder::embed_tokens(std::string_view text) const {
    const auto id = inner_->id();
    {
        std::lock_guard lock(mutex_);
        if (const auto* hit = cache_.find(id, text)) return *hit;
    }
    auto h = inner_->embed_tokens(text);
    std::lock_guard lock(mutex_);
    cache_.insert(id, text, h);
    return h;
}

EmbeddingCache CachingEncoder::snapshot() const {
    std::lock_guard lock(mutex_);
    return cache_;
}

}  // namespace slwla
