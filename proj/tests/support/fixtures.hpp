#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "oracle.hpp"
#include "slwla/attention.hpp"
#include "slwla/corpus.hpp"
#include "slwla/encoder.hpp"
#include "slwla/metrics.hpp"

namespace fx {

using namespace slwla;

struct Record {
    std::string id;
    std::string text;
    std::vector<std::string> aspects;
};

inline Corpus make_corpus(const std::vector<Record>& records, const std::map<AspectId, Split>& split = {}) {
    AspectCatalog catalog;
    std::vector<LabeledSentence> sentences;
    for (const auto& r : records) {
        LabeledSentence s;
        s.id = r.id;
        s.text = r.text;
        for (std::size_t i = 0, j; i < r.text.size(); i = j + 1) {
            j = r.text.find(' ', i);
            if (j == std::string::npos) j = r.text.size();
            if (j > i) s.tokens.push_back(r.text.substr(i, j - i));
        }
        s.aspects = r.aspects;
        std::sort(s.aspects.begin(), s.aspects.end());
        for (const auto& a : r.aspects) catalog.names[a] = a;
        sentences.push_back(std::move(s));
    }
    catalog.split = split;
    return Corpus(std::move(catalog), std::move(sentences));
}

// The 3-way 2-shot example meta-task: six support sentences and two queries.
inline std::vector<Record> meta_task_records() {
    return {
        {"a1", "Perhaps we'll try one more time and hope our experience is better.", {"experience"}},
        {"a2", "The experience and service is very great!", {"experience", "service"}},
        {"b1", "It was happy hour so the drinks were a little less expensive.", {"drinks", "price"}},
        {"b2", "Just an hour in the afternoon and only 50 cents or so off the drinks with no food specials.",
         {"drinks", "price", "food"}},
        {"c1", "They also have rotating dining specials.", {"food"}},
        {"c2", "The food was good and price was reasonable.", {"food", "price"}},
        {"q1", "My experience as far as service and the food are the same.", {"experience", "service", "food"}},
        {"q2", "Drinks were tasty and quick, and the atmosphere was cool.", {"drinks", "atmosphere"}},
    };
}

inline Corpus meta_task_corpus() {
    return make_corpus(meta_task_records(),
                       {{"experience", Split::train}, {"drinks", Split::train}, {"food", Split::train}});
}

inline std::string meta_task_jsonl() {
    std::string out;
    for (const auto& r : meta_task_records()) {
        out += "{\"id\":\"" + r.id + "\",\"text\":\"" + r.text + "\",\"aspects\":[";
        for (std::size_t i = 0; i < r.aspects.size(); ++i) out += (i ? ",\"" : "\"") + r.aspects[i] + "\"";
        out += "]}\n";
    }
    return out;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("slwla_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double uniform(Rng& rng, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline EmbeddingMatrix random_matrix(std::size_t d, std::size_t L, std::size_t valid_len, Rng& rng) {
    EmbeddingMatrix m;
    m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(L));
    for (std::size_t i = 0; i < valid_len; ++i)
        for (std::size_t j = 0; j < d; ++j) m.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = uniform(rng);
    m.valid_len = valid_len;
    return m;
}

inline Eigen::VectorXd random_vector(std::size_t d, Rng& rng) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (auto& x : v) x = uniform(rng);
    return v;
}

// Random episode tensors; lengths drawn from [1, L].
inline EpisodeInputs random_inputs(std::size_t N, std::size_t K, std::size_t M, std::size_t d, std::size_t L,
                                   Rng& rng) {
    EpisodeInputs in;
    in.support.resize(N);
    for (auto& cls : in.support)
        for (std::size_t k = 0; k < K; ++k) cls.push_back(random_matrix(d, L, pick(rng, 1, L), rng));
    for (std::size_t m = 0; m < M; ++m) in.queries.push_back(random_matrix(d, L, pick(rng, 1, L), rng));
    for (std::size_t n = 0; n < N; ++n) in.labels.push_back(random_vector(d, rng));
    return in;
}

inline ModelParams random_params(std::size_t d, std::size_t e, Rng& rng, double scale = 0.5) {
    auto p = ModelParams::zeros(d, e);
    for (auto& x : p.W.reshaped()) x = uniform(rng, -scale, scale);
    for (auto& x : p.b) x = uniform(rng, -scale, scale);
    p.W_g = Eigen::Vector2d(uniform(rng, -2, 2), uniform(rng, -2, 2));
    p.b_g = uniform(rng);
    for (auto& x : p.W_s.reshaped()) x = uniform(rng, -scale, scale);
    for (auto& x : p.b_s) x = uniform(rng, -scale, scale);
    return p;
}

inline std::vector<LabelBits> random_gold(std::size_t M, std::size_t N, Rng& rng) {
    std::vector<LabelBits> gold(M, LabelBits(N, 0));
    for (auto& g : gold) {
        for (auto& bit : g) bit = pick(rng, 0, 2) == 0;
        g[pick(rng, 0, N - 1)] = 1;
    }
    return gold;
}

inline oracle::Sentence to_oracle(const EmbeddingMatrix& h) {
    oracle::Sentence s(h.valid_len, oracle::Vec(h.dim()));
    for (std::size_t i = 0; i < h.valid_len; ++i)
        for (std::size_t j = 0; j < h.dim(); ++j)
            s[i][j] = h.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    return s;
}

inline oracle::Vec to_oracle(const Eigen::VectorXd& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

inline std::vector<oracle::Vec> rows_of(const Eigen::MatrixXd& m) {
    std::vector<oracle::Vec> out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    return out;
}

inline oracle::Params to_oracle(const ModelParams& p) {
    oracle::Params o;
    o.W = rows_of(p.W);
    o.b = to_oracle(p.b);
    o.w_a = p.W_g[0];
    o.w_b = p.W_g[1];
    o.b_g = p.b_g;
    o.W_s = rows_of(p.W_s);
    o.b_s = to_oracle(p.b_s);
    return o;
}

inline oracle::Mode to_oracle(Variant v) {
    switch (v) {
        case Variant::proto: return oracle::Mode::proto;
        case Variant::slw: return oracle::Mode::slw;
        default: return oracle::Mode::guided;
    }
}

inline oracle::Result run_oracle(const EpisodeInputs& in, const ModelParams& p, Variant v, bool uniform_gamma = false) {
    std::vector<std::vector<oracle::Sentence>> support;
    for (const auto& cls : in.support) {
        support.emplace_back();
        for (const auto& h : cls) support.back().push_back(to_oracle(h));
    }
    std::vector<oracle::Sentence> queries;
    for (const auto& h : in.queries) queries.push_back(to_oracle(h));
    std::vector<oracle::Vec> labels;
    for (const auto& l : in.labels) labels.push_back(to_oracle(l));
    return oracle::run(support, queries, labels, to_oracle(p), to_oracle(v), uniform_gamma);
}

inline double max_abs_diff(const oracle::Vec& a, const Eigen::VectorXd& b) {
    if (static_cast<Eigen::Index>(a.size()) != b.size()) return 1e300;
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[static_cast<Eigen::Index>(i)]));
    return m;
}

inline double max_abs_diff(const std::vector<oracle::Vec>& rows, const Eigen::MatrixXd& m) {
    if (static_cast<Eigen::Index>(rows.size()) != m.rows()) return 1e300;
    double out = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != m.cols()) return 1e300;
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out = std::max(out, std::abs(rows[r][c] - m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    }
    return out;
}

}  // namespace fx
