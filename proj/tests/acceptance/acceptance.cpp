// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion numbers to run a subset.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "slwla/commands.hpp"
#include "slwla/label_augmentation.hpp"
#include "slwla/synthetic.hpp"
#include "slwla/training.hpp"

using namespace slwla;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Tolerances and limits.
constexpr double oracle_tolerance = 1e-6;
constexpr double gradient_tolerance = 1e-4;
constexpr double degenerate_tolerance = 1e-12;
constexpr double min_test_auc = 0.90;
constexpr double min_test_f1 = 60.0;
constexpr double learning_budget_s = 1800.0;

std::string fmt(double x, int digits = 4) {
    std::ostringstream s;
    s << std::setprecision(digits) << x;
    return s.str();
}

const std::vector<std::string> vocab{"food", "pizza", "salad", "wine", "beer", "vodka", "staff", "waiter",
                                     "rude", "friendly", "price", "cheap", "pricey", "room", "clean", "noisy",
                                     "music", "loud", "great", "bad", "the", "was", "and", "very",
                                     "menu", "table", "hour", "happy", "drinks", "service"};

std::string random_text(Rng& rng, std::size_t lo, std::size_t hi) {
    std::string out;
    for (std::size_t i = 0, n = fx::pick(rng, lo, hi); i < n; ++i)
        out += (out.empty() ? "" : " ") + vocab[fx::pick(rng, 0, vocab.size() - 1)];
    return out;
}

EpisodeInputs mock_inputs(const Encoder& enc, std::size_t N, std::size_t K, std::size_t M, Rng& rng) {
    EpisodeInputs in;
    in.support.resize(N);
    for (auto& cls : in.support)
        for (std::size_t k = 0; k < K; ++k) cls.push_back(enc.embed_tokens(random_text(rng, 1, 8)));
    for (std::size_t m = 0; m < M; ++m) in.queries.push_back(enc.embed_tokens(random_text(rng, 1, 8)));
    for (std::size_t n = 0; n < N; ++n) in.labels.push_back(enc.embed_label_text(random_text(rng, 1, 3)));
    return in;
}

double diff(const std::vector<oracle::Vec>& a, const std::vector<Eigen::VectorXd>& b) {
    if (a.size() != b.size()) return 1e300;
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, fx::max_abs_diff(a[i], b[i]));
    return m;
}

std::vector<Eigen::VectorXd> columns(const MatrixXd& m) {
    std::vector<Eigen::VectorXd> out;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m.col(c));
    return out;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    Rng rng(2024);
    MockEncoder enc(11, 4, 6);
    std::size_t episodes = 0;
    double worst = 0;
    // Token vectors themselves follow the documented hash rule.
    for (const auto& w : vocab) {
        const auto h = enc.embed_tokens(w);
        worst = std::max(worst, fx::max_abs_diff(oracle::mock_token(11, w, 4), h.column(0)));
    }
    for (auto variant : {Variant::slwla, Variant::slw, Variant::proto}) {
        for (int t = 0; t < 100; ++t, ++episodes) {
            const auto in = mock_inputs(enc, 2, 2, 3, rng);
            const auto params = fx::random_params(4, 4, rng, 1.0);
            const auto tr = forward_episode(in, params, {variant, false});
            const auto ref = fx::run_oracle(in, params, variant);
            std::vector<MatrixXd> reps;
            for (const auto& q : tr.queries) reps.push_back(q.reps);
            const auto pred = predict_episode(tr.prototypes, reps, 0.3);
            for (std::size_t n = 0; n < 2; ++n) {
                const auto& c = tr.classes[n];
                const auto& o = ref.classes[n];
                worst = std::max(worst, fx::max_abs_diff(o.v, c.v));
                worst = std::max(worst, diff(o.theta, c.theta_tilde));
                worst = std::max(worst, diff(o.r, columns(c.R)));
                worst = std::max(worst, fx::max_abs_diff(o.gamma, c.sentence.gamma));
                worst = std::max(worst, fx::max_abs_diff(o.p, c.p));
                if (variant != Variant::proto) {
                    worst = std::max(worst, fx::max_abs_diff(o.Wn, c.Wn));
                    worst = std::max(worst, diff(o.beta, c.beta));
                    worst = std::max(worst, fx::max_abs_diff(o.Ws, c.sentence.Ws));
                    if (o.anchor != c.sentence.anchor) worst = 1e300;
                }
                if (variant == Variant::slwla) worst = std::max(worst, diff(o.alpha, c.alpha));
            }
            for (std::size_t m = 0; m < in.queries.size(); ++m) {
                const auto& o = ref.queries[m];
                worst = std::max(worst, diff(o.weights, tr.queries[m].weights));
                worst = std::max(worst, diff(o.reps, columns(tr.queries[m].reps)));
                worst = std::max(worst, fx::max_abs_diff(o.distance, pred.distances[m]));
                worst = std::max(worst, fx::max_abs_diff(o.yhat, pred.scores[m]));
            }
        }
    }
    return {worst <= oracle_tolerance, std::to_string(episodes) + " episodes, max abs diff " + fmt(worst)};
}

Outcome gradient_suite() {
    double worst = 0;
    std::string worst_name;
    std::size_t seeds = 0;
    bool pass = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed, ++seeds) {
        Rng rng(seed);
        MockEncoder enc(seed, 5, 6);
        const auto in = mock_inputs(enc, 2, 2, 3, rng);
        const auto gold = fx::random_gold(3, 2, rng);
        const auto params = fx::random_params(5, 3, rng, 1.0);
        for (auto variant : {Variant::slwla, Variant::slw}) {
            const auto report = gradient_check(params, in, gold, {variant, false}, gradient_tolerance);
            pass = pass && report.passed;
            for (const auto& t : report.tensors)
                if (t.max_relative_error > worst) {
                    worst = t.max_relative_error;
                    worst_name = t.name;
                }
        }
    }
    return {pass && worst < gradient_tolerance,
            std::to_string(seeds) + " seeds, max relative error " + fmt(worst) + " (" + worst_name + ")"};
}

bool on_simplex(const VectorXd& w) { return (w.array() >= 0.0).all() && std::abs(w.sum() - 1.0) < 1e-9; }

Outcome invariant_suite() {
    Rng rng(77);
    std::size_t cases = 0, failures = 0;
    std::string first;
    const auto expect = [&](bool ok, const char* what) {
        if (!ok && failures++ == 0) first = what;
    };
    for (; cases < 1200; ++cases) {
        const std::size_t N = fx::pick(rng, 1, 4), K = fx::pick(rng, 1, 4), d = fx::pick(rng, 2, 6), L = 7;
        auto in = fx::random_inputs(N, K, 3, d, L, rng);
        const auto params = fx::random_params(d, fx::pick(rng, 1, 4), rng, 1.0);
        const ForwardOptions opts{Variant::slwla, false};
        const auto tr = forward_episode(in, params, opts);

        for (std::size_t n = 0; n < N; ++n) {
            const auto& c = tr.classes[n];
            expect(on_simplex(c.sentence.gamma), "gamma on simplex");
            expect((c.p - c.R * c.sentence.gamma).norm() < 1e-12, "prototype in hull of sentence reps");
            for (std::size_t k = 0; k < K; ++k) {
                expect(on_simplex(c.beta[k]) && on_simplex(c.theta_tilde[k]), "word weights on simplex");
                expect(c.theta_tilde[k].size() == static_cast<Eigen::Index>(in.support[n][k].valid_len),
                       "weights cover valid tokens only");
                expect((c.R.col(static_cast<Eigen::Index>(k)) - in.support[n][k].valid() * c.theta_tilde[k]).norm() <
                           1e-12,
                       "sentence rep in hull of tokens");
            }
            if (K == 1) expect(c.sentence.gamma[0] == 1.0 && c.p == c.R.col(0), "K=1 prototype");
        }
        for (const auto& q : tr.queries)
            for (const auto& w : q.weights) expect(on_simplex(w), "query weights on simplex");

        // Padding content never matters.
        auto noisy = in;
        for (auto& cls : noisy.support)
            for (auto& h : cls)
                if (h.valid_len < L) h.values.rightCols(static_cast<Eigen::Index>(L - h.valid_len)).setConstant(5.0);
        for (auto& h : noisy.queries)
            if (h.valid_len < L) h.values.rightCols(static_cast<Eigen::Index>(L - h.valid_len)).setConstant(-3.0);
        const auto tn = forward_episode(noisy, params, opts);
        expect(tn.prototypes == tr.prototypes, "padding masked in support");
        for (std::size_t m = 0; m < tr.queries.size(); ++m)
            expect(tn.queries[m].reps == tr.queries[m].reps, "padding masked in queries");

        // Uniform gamma gives the plain mean of sentence reps.
        const auto tu = forward_episode(in, params, {Variant::slwla, true});
        for (std::size_t n = 0; n < N; ++n)
            expect((tu.classes[n].p - tu.classes[n].R.rowwise().mean()).norm() < 1e-12, "uniform gamma mean");

        // Permuting support sentences permutes gamma and keeps the prototype.
        std::vector<std::size_t> order(K);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        auto perm = in;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t k = 0; k < K; ++k) perm.support[n][k] = in.support[n][order[k]];
        const auto tp = forward_episode(perm, params, opts);
        for (std::size_t n = 0; n < N; ++n) {
            // With tied lengths the anchor moves, so only compare when the shortest is unique.
            const auto& lens = tr.classes[n].lengths;
            const auto shortest = *std::min_element(lens.begin(), lens.end());
            if (std::count(lens.begin(), lens.end(), shortest) != 1) continue;
            expect((tp.classes[n].p - tr.classes[n].p).norm() < 1e-12, "permutation keeps prototype");
            for (std::size_t k = 0; k < K; ++k)
                expect(std::abs(tp.classes[n].sentence.gamma[static_cast<Eigen::Index>(k)] -
                                tr.classes[n].sentence.gamma[static_cast<Eigen::Index>(order[k])]) < 1e-12,
                       "permutation permutes gamma");
        }

        // Scores, decisions and loss.
        std::vector<MatrixXd> reps;
        for (const auto& q : tr.queries) reps.push_back(q.reps);
        const auto pred = predict_episode(tr.prototypes, reps, 0.3);
        const auto gold = fx::random_gold(3, N, rng);
        for (std::size_t m = 0; m < 3; ++m) {
            expect(on_simplex(pred.scores[m]), "scores on simplex");
            expect(std::count(pred.decisions[m].begin(), pred.decisions[m].end(), 1) >= 1, "at least one decision");
            const VectorXd shifted = softmax(-(pred.distances[m].array() + 1.5).matrix());
            expect((shifted - pred.scores[m]).cwiseAbs().maxCoeff() < 1e-12, "distance shift invariance");
        }
        expect(episode_loss(pred, gold) >= 0.0, "loss non-negative");
    }
    return {failures == 0, std::to_string(cases) + " random cases" +
                               (failures ? ", " + std::to_string(failures) + " failures, first: " + first : "")};
}

Outcome degeneration() {
    Rng rng(5);
    double worst = 0;
    // (a) uniform sentence weights over uniform word weights give the vanilla prototype.
    for (int t = 0; t < 200; ++t) {
        const std::size_t N = fx::pick(rng, 1, 5), K = fx::pick(rng, 1, 5), d = fx::pick(rng, 2, 8);
        const auto in = fx::random_inputs(N, K, 2, d, 9, rng);
        auto params = fx::random_params(d, 4, rng);
        params.W.setZero();
        params.b.setZero();
        const auto attended = forward_episode(in, params, {Variant::slw, true});
        const auto proto = forward_episode(in, params, {Variant::proto, false});
        for (std::size_t n = 0; n < N; ++n) {
            VectorXd vanilla = VectorXd::Zero(static_cast<Eigen::Index>(d));
            for (const auto& h : in.support[n]) vanilla += h.valid().rowwise().mean();
            vanilla /= static_cast<double>(K);
            worst = std::max(worst, (attended.classes[n].p - vanilla).cwiseAbs().maxCoeff());
            worst = std::max(worst, (proto.classes[n].p - vanilla).cwiseAbs().maxCoeff());
        }
    }
    const bool uniform_ok = worst <= degenerate_tolerance;

    // (b) m = 0 label augmentation against plain label names.
    SyntheticSpec spec;
    spec.aspects = 12;
    spec.sentences_per_aspect = 30;
    auto syn = make_synthetic_corpus(spec);
    const auto corpus = syn.corpus.with_catalog(split_aspects(syn.corpus.catalog(), {8, 2, 2}, 0));
    MockEncoder enc(0, 16, 50, syn.rig);
    const auto m0 = augment_labels(corpus, corpus.catalog().all_aspects(), enc, {0, 30, 0});
    const auto plain = plain_labels(corpus.catalog(), enc.id());
    const EpisodeEmbedder with_m0(corpus, enc, &m0), with_plain(corpus, enc, &plain);
    Rng prng(9);
    const auto params = ModelParams::initialize(16, 4, prng);
    std::size_t mismatches = 0, compared = 0;
    for (const auto& ep : episode_stream(corpus, Split::train, {5, 2, 3, std::nullopt}, 50, 4)) {
        const auto a = run_episode(params, {Variant::slwla, false}, with_m0.embed(ep), 0.3);
        const auto b = run_episode(params, {Variant::slw_las, false}, with_plain.embed(ep), 0.3);
        for (std::size_t m = 0; m < a.scores.size(); ++m, ++compared)
            if (a.scores[m] != b.scores[m] || a.distances[m] != b.distances[m]) ++mismatches;
    }
    return {uniform_ok && mismatches == 0,
            "(a) max diff " + fmt(worst) + "; (b) " + std::to_string(compared) + " query score vectors, " +
                std::to_string(mismatches) + " not bitwise equal"};
}

Outcome learning_check() {
    const auto start = std::chrono::steady_clock::now();
    SyntheticSpec spec;
    spec.noise_one = 0.4;
    spec.noise_two = 0.3;
    const auto syn = make_synthetic_corpus(spec);
    const auto corpus = syn.corpus.with_catalog(split_aspects(syn.corpus.catalog(), {20, 5, 5}, 0));
    MockEncoder enc(0, 256, 50, syn.rig);
    const auto labels = augment_labels(corpus, corpus.catalog().all_aspects(), enc, {1, 100, 0});

    TrainingConfig cfg;
    cfg.way = 5;
    cfg.shot = 5;
    cfg.optimizer = OptimizerKind::adam;
    cfg.learning_rate = 0.002;
    cfg.episodes_per_epoch = 800;
    cfg.val_episodes = 200;
    cfg.max_epochs = 4;
    cfg.patience = 3;

    const auto slwla = train(cfg, Variant::slwla, corpus, enc, &labels);
    const auto proto = train(cfg, Variant::proto, corpus, enc, nullptr);
    const auto test = episode_stream(corpus, Split::test, cfg.shape(), cfg.test_episodes, cfg.test_seed);
    const EpisodeEmbedder embedder(corpus, enc, &labels);
    const auto rs = evaluate(slwla.params, {Variant::slwla, false}, embedder, test, cfg.tau, cfg.auc_mode);
    const auto rp = evaluate(proto.params, {Variant::proto, false}, embedder, test, cfg.tau, cfg.auc_mode);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ostringstream curve;
    for (const auto& e : slwla.log) curve << (e.epoch > 1 ? " " : "") << fmt(e.val_auc);
    const bool pass = rs.auc >= min_test_auc && rs.macro_f1 >= min_test_f1 && rs.auc > rp.auc &&
                      secs < learning_budget_s;
    return {pass, "Proto-SLWLA test AUC " + fmt(rs.auc) + " F1 " + fmt(rs.macro_f1) + " vs proto AUC " +
                      fmt(rp.auc) + " F1 " + fmt(rp.macro_f1) + " on " + std::to_string(rs.episodes) +
                      " episodes; val AUC by epoch " + curve.str() + ", best epoch " +
                      std::to_string(slwla.best_epoch) + "; " + fmt(secs, 3) + "s"};
}

Outcome metric_correctness() {
    Rng rng(31);
    std::size_t checked = 0, mismatches = 0;
    for (int t = 0; t < 2000; ++t) {
        const std::size_t N = fx::pick(rng, 1, 5);
        const std::size_t M = fx::pick(rng, 1, 20 / N);
        std::vector<VectorXd> scores;
        std::vector<LabelBits> gold;
        std::vector<double> flat;
        std::vector<int> flat_gold;
        for (std::size_t m = 0; m < M; ++m) {
            VectorXd s(static_cast<Eigen::Index>(N));
            LabelBits g(N);
            for (std::size_t n = 0; n < N; ++n) {
                s[static_cast<Eigen::Index>(n)] = static_cast<double>(fx::pick(rng, 0, 8)) / 8.0;
                g[n] = static_cast<std::uint8_t>(fx::pick(rng, 0, 1));
                flat.push_back(s[static_cast<Eigen::Index>(n)]);
                flat_gold.push_back(g[n]);
            }
            scores.push_back(s);
            gold.push_back(g);
        }
        const auto got = episode_auc(scores, gold, AucMode::pooled);
        const auto pos = std::count(flat_gold.begin(), flat_gold.end(), 1);
        const bool defined = pos > 0 && pos < static_cast<long>(flat_gold.size());
        if (got.has_value() != defined) ++mismatches;
        else if (defined && std::abs(*got - oracle::pair_auc(flat, flat_gold)) > 1e-12) ++mismatches;
        if (defined) ++checked;
    }
    const auto bits = [](std::initializer_list<int> xs) {
        LabelBits out;
        for (int x : xs) out.push_back(static_cast<std::uint8_t>(x));
        return out;
    };
    const bool example = std::abs(*roc_auc({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}) - 0.75) < 1e-15;
    const double f1a = macro_f1({bits({1, 0}), bits({0, 1}), bits({1, 1})}, {bits({1, 0}), bits({0, 1}), bits({0, 1})});
    const double f1b = macro_f1({bits({1, 0, 0}), bits({1, 0, 0}), bits({0, 0, 1})},
                                {bits({0, 1, 0}), bits({1, 0, 0}), bits({0, 0, 1})});
    const double f1c = macro_f1({bits({1, 1}), bits({0, 1})}, {bits({1, 1}), bits({1, 0})});
    const bool f1_ok =
        std::abs(f1a - 5.0 / 6.0) < 1e-12 && std::abs(f1b - 5.0 / 9.0) < 1e-12 && std::abs(f1c - 2.0 / 3.0) < 1e-12;
    return {mismatches == 0 && example && f1_ok,
            std::to_string(checked) + " episodes against the pair-counting oracle, " + std::to_string(mismatches) +
                " mismatches; crafted F1 " + fmt(f1a) + " " + fmt(f1b) + " " + fmt(f1c)};
}

Outcome protocol_defaults() {
    const RunConfig cfg;
    const auto kv = cfg.to_key_values();
    const std::map<std::string, std::string> expected{
        {"tau", "0.3"},          {"e_m", "4"},           {"max_len", "50"},          {"d", "768"},
        {"learning_rate", "1e-05"}, {"queries_per_class", "5"}, {"episodes_per_epoch", "800"},
        {"val_episodes", "600"}, {"test_episodes", "600"}, {"patience", "3"}};
    std::string wrong;
    for (const auto& [k, v] : expected) {
        const auto it = kv.find(k);
        if (it == kv.end() || (it->second != v && std::stod(it->second) != std::stod(v))) wrong += " " + k;
    }
    const auto& t = cfg.training;
    if (t.tau != 0.3 || t.repeat != 4 || t.learning_rate != 1e-5 || cfg.dim != 768 || cfg.max_len != 50) wrong += " typed";
    auto ten = t;
    ten.way = 10;
    if (t.resolved_batch_size() != 4 || ten.resolved_batch_size() != 2) wrong += " batch_size";
    return {wrong.empty(), wrong.empty() ? std::to_string(expected.size()) + " keys plus batch 4/2 match"
                                         : "mismatched:" + wrong};
}

Outcome augmentation_pipeline() {
    fx::TempDir dir;
    fx::write_file(dir / "corpus.jsonl",
                   "{\"id\":\"s1\",\"text\":\"The cocktails were strong\",\"aspects\":[\"drinks_alcohol_hard\"]}\n"
                   "{\"id\":\"s2\",\"text\":\"Great martini and a cheap beer\",\"aspects\":[\"drinks_alcohol_hard\"]}\n"
                   "{\"id\":\"s3\",\"text\":\"Whiskey list is long\",\"aspects\":[\"drinks_alcohol_hard\"]}\n"
                   "{\"id\":\"s4\",\"text\":\"Pasta was cold\",\"aspects\":[\"food_food\"]}\n"
                   "{\"id\":\"s5\",\"text\":\"Tasty pizza\",\"aspects\":[\"food_food\"]}\n");
    fx::write_file(dir / "split.json", R"({"train":["drinks_alcohol_hard","food_food"],"valid":[],"test":[]})");
    // vodka is boosted in every drinks prompt, gin only in two of the three
    save_mlm_rig(dir / "rig.json", {{"alcohol", {{"vodka", 9.0}}},
                                    {"martini", {{"gin", 5.0}}},
                                    {"whiskey", {{"gin", 5.0}}},
                                    {"food", {{"delicious", 8.0}}}});
    const std::string common = std::string(SLWLA_CLI_PATH) + " augment-labels --data " + (dir / "corpus.jsonl").string() +
                               " --split-file " + (dir / "split.json").string() + " --mlm-rig " +
                               (dir / "rig.json").string() + " --dim 16 --splits train";
    std::string detail;
    bool pass = true;
    for (std::size_t m : {1, 2}) {
        std::vector<std::string> files;
        for (int run = 0; run < 2; ++run) {
            const auto out = dir / ("labels_m" + std::to_string(m) + "_" + std::to_string(run) + ".json");
            const int status = std::system((common + " --m " + std::to_string(m) + " --out " + out.string() + " > " +
                                            (dir / "log.txt").string() + " 2>&1")
                                               .c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "augment-labels exited " + std::to_string(status)};
            files.push_back(fx::read_file(out));
        }
        const auto set = load_augmented_labels(dir / ("labels_m" + std::to_string(m) + "_0.json"));
        const std::string want = m == 1 ? "drinks_alcohol_hard_vodka" : "drinks_alcohol_hard_vodka_gin";
        const auto& got = set.at("drinks_alcohol_hard").combined;
        pass = pass && files[0] == files[1] && got == want && set.at("food_food").combined.rfind("food_food_delicious", 0) == 0;
        detail += (detail.empty() ? "" : "; ") + std::string("m=") + std::to_string(m) + " -> " + got +
                  (files[0] == files[1] ? " (identical reruns)" : " (reruns differ)");
    }
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},     {"gradient suite", gradient_suite},
        {"invariant suite", invariant_suite},           {"degeneration checks", degeneration},
        {"scaled-down learning check", learning_check}, {"metric correctness", metric_correctness},
        {"protocol defaults", protocol_defaults},       {"label augmentation pipeline", augmentation_pipeline}};
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail
                  << " [" << std::fixed << std::setprecision(1) << secs << "s]" << std::defaultfloat << std::endl;
    }
    return failed ? 1 : 0;
}
