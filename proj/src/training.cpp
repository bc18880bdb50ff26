#include "slwla/training.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "slwla/error.hpp"
#include "slwla/parallel.hpp"

namespace slwla {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t default_batch_size(std::size_t way) { return way <= 5 ? 4 : 2; }

void TrainingConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(episodes_per_epoch, "episodes_per_epoch");
    positive(val_episodes, "val_episodes");
    positive(test_episodes, "test_episodes");
    positive(patience, "patience");
    positive(max_epochs, "max_epochs");
    positive(repeat, "e_m");
    positive(way, "n_way");
    positive(shot, "k_shot");
    positive(queries_per_class, "queries_per_class");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
}

namespace {

std::string format_double(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
        auto v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

std::map<std::string, std::string> TrainingConfig::to_key_values() const {
    return {
        {"learning_rate", format_double(learning_rate)},
        {"episodes_per_epoch", std::to_string(episodes_per_epoch)},
        {"val_episodes", std::to_string(val_episodes)},
        {"test_episodes", std::to_string(test_episodes)},
        {"batch_size", std::to_string(resolved_batch_size())},
        {"patience", std::to_string(patience)},
        {"max_epochs", std::to_string(max_epochs)},
        {"tau", format_double(tau)},
        {"e_m", std::to_string(repeat)},
        {"m", std::to_string(m)},
        {"n_way", std::to_string(way)},
        {"k_shot", std::to_string(shot)},
        {"queries_per_class", std::to_string(queries_per_class)},
        {"seed", std::to_string(seed)},
        {"val_seed", std::to_string(val_seed)},
        {"test_seed", std::to_string(test_seed)},
        {"optimizer", optimizer == OptimizerKind::sgd ? "sgd" : "adam"},
        {"adam_beta1", format_double(adam_beta1)},
        {"adam_beta2", format_double(adam_beta2)},
        {"adam_epsilon", format_double(adam_epsilon)},
        {"auc_mode", auc_mode == AucMode::pooled ? "pooled" : "macro"},
        {"fine_tune", fine_tune ? "true" : "false"},
        {"threads", std::to_string(threads)},
    };
}

bool TrainingConfig::set(const std::string& key, const std::string& value) {
    if (key == "learning_rate") learning_rate = parse_double(key, value);
    else if (key == "episodes_per_epoch") episodes_per_epoch = parse_uint(key, value);
    else if (key == "val_episodes") val_episodes = parse_uint(key, value);
    else if (key == "test_episodes") test_episodes = parse_uint(key, value);
    else if (key == "batch_size") batch_size = parse_uint(key, value);
    else if (key == "patience") patience = parse_uint(key, value);
    else if (key == "max_epochs") max_epochs = parse_uint(key, value);
    else if (key == "tau") tau = parse_double(key, value);
    else if (key == "e_m") repeat = parse_uint(key, value);
    else if (key == "m") m = parse_uint(key, value);
    else if (key == "n_way") way = parse_uint(key, value);
    else if (key == "k_shot") shot = parse_uint(key, value);
    else if (key == "queries_per_class") queries_per_class = parse_uint(key, value);
    else if (key == "seed") seed = parse_uint(key, value);
    else if (key == "val_seed") val_seed = parse_uint(key, value);
    else if (key == "test_seed") test_seed = parse_uint(key, value);
    else if (key == "optimizer") {
        if (value == "sgd") optimizer = OptimizerKind::sgd;
        else if (value == "adam") optimizer = OptimizerKind::adam;
        else throw ConfigError("optimizer must be sgd or adam, got '" + value + "'");
    } else if (key == "adam_beta1") adam_beta1 = parse_double(key, value);
    else if (key == "adam_beta2") adam_beta2 = parse_double(key, value);
    else if (key == "adam_epsilon") adam_epsilon = parse_double(key, value);
    else if (key == "auc_mode") {
        if (value == "pooled") auc_mode = AucMode::pooled;
        else if (value == "macro") auc_mode = AucMode::macro;
        else throw ConfigError("auc_mode must be pooled or macro, got '" + value + "'");
    } else if (key == "fine_tune") fine_tune = parse_bool(key, value);
    else if (key == "threads") threads = parse_uint(key, value);
    else return false;
    return true;
}

// ---------------------------------------------------------------------------

EpisodeEmbedder::EpisodeEmbedder(const Corpus& corpus, const Encoder& encoder, const AugmentedLabelSet* labels)
    : corpus_(corpus), encoder_(encoder) {
    if (!labels) return;
    for (const auto& [aspect, label] : labels->labels)
        label_embeddings_.emplace(aspect, encoder.embed_label_text(label.combined));
}

EpisodeInputs EpisodeEmbedder::embed(const Episode& episode) const {
    EpisodeInputs in;
    for (const auto& cls : episode.support) {
        std::vector<EmbeddingMatrix> hs;
        for (auto index : cls.sentences) hs.push_back(encoder_.embed_tokens(corpus_.sentence(index).text));
        in.support.push_back(std::move(hs));
        if (!label_embeddings_.empty()) {
            auto it = label_embeddings_.find(cls.aspect);
            if (it == label_embeddings_.end())
                throw ValidationError("no label text for episode aspect '" + cls.aspect + "'");
            in.labels.push_back(it->second);
        }
    }
    for (const auto& q : episode.query) in.queries.push_back(encoder_.embed_tokens(corpus_.sentence(q.sentence).text));
    return in;
}

std::vector<LabelBits> EpisodeEmbedder::gold(const Episode& episode) const {
    std::vector<LabelBits> out;
    for (const auto& q : episode.query) out.push_back(q.labels);
    return out;
}

EpisodePrediction run_episode(const ModelParams& params, const ForwardOptions& options, const EpisodeInputs& inputs,
                              double tau, ForwardTrace* trace_out) {
    auto trace = forward_episode(inputs, params, options);
    std::vector<MatrixXd> reps;
    for (const auto& q : trace.queries) reps.push_back(q.reps);
    auto prediction = predict_episode(trace.prototypes, reps, tau);
    if (trace_out) *trace_out = std::move(trace);
    return prediction;
}

double episode_objective(const ModelParams& params, const EpisodeInputs& inputs, const std::vector<LabelBits>& gold,
                         const ForwardOptions& options) {
    return episode_loss(run_episode(params, options, inputs, 0.5), gold);
}

ModelParams episode_gradient(const ModelParams& params, const EpisodeInputs& inputs, const std::vector<LabelBits>& gold,
                             const ForwardOptions& options, double* loss) {
    const auto trace = forward_episode(inputs, params, options);
    std::vector<MatrixXd> reps;
    for (const auto& q : trace.queries) reps.push_back(q.reps);
    const auto g = episode_loss_gradient(trace.prototypes, reps, gold);
    if (loss) *loss = g.loss;
    return backward_episode(inputs, params, options, trace, g.d_prototypes, g.d_reps);
}

MetricsReport evaluate(const ModelParams& params, const ForwardOptions& options, const EpisodeEmbedder& embedder,
                       const std::vector<Episode>& episodes, double tau, AucMode auc_mode, std::size_t threads) {
    if (episodes.empty()) throw ValidationError("evaluate needs at least one episode");
    struct Slot {
        std::optional<double> auc;
        double f1 = 0.0;
        double loss = 0.0;
    };
    std::vector<Slot> slots(episodes.size());
    parallel_for(episodes.size(), threads, [&](std::size_t i) {
        const auto inputs = embedder.embed(episodes[i]);
        const auto gold = embedder.gold(episodes[i]);
        const auto prediction = run_episode(params, options, inputs, tau);
        slots[i].auc = episode_auc(prediction.scores, gold, auc_mode);
        slots[i].f1 = macro_f1(prediction.decisions, gold);
        slots[i].loss = episode_loss(prediction, gold);
    });
    MetricsReport report;
    report.episodes = episodes.size();
    double auc_sum = 0.0, f1_sum = 0.0, loss_sum = 0.0;
    for (const auto& s : slots) {
        if (s.auc) auc_sum += *s.auc;
        else ++report.skipped;
        f1_sum += s.f1;
        loss_sum += s.loss;
    }
    const auto scored = report.episodes - report.skipped;
    report.auc = scored ? auc_sum / static_cast<double>(scored) : 0.0;
    report.macro_f1 = 100.0 * f1_sum / static_cast<double>(report.episodes);
    report.mean_loss = loss_sum / static_cast<double>(report.episodes);
    return report;
}

// ---------------------------------------------------------------------------

Optimizer::Optimizer(const TrainingConfig& config, const ModelParams& like)
    : kind_(config.optimizer),
      lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_epsilon),
      first_(like),
      second_(like) {
    first_ *= 0.0;
    second_ *= 0.0;
}

void Optimizer::step(ModelParams& params, const ModelParams& grad) {
    ++t_;
    auto p = params.tensors();
    auto grad_copy = grad;
    auto g = grad_copy.tensors();
    if (kind_ == OptimizerKind::sgd) {
        for (std::size_t t = 0; t < p.size(); ++t)
            for (std::size_t i = 0; i < p[t].size; ++i) p[t].data[i] -= lr_ * g[t].data[i];
        return;
    }
    auto m1 = first_.tensors();
    auto m2 = second_.tensors();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t t = 0; t < p.size(); ++t)
        for (std::size_t i = 0; i < p[t].size; ++i) {
            const double gi = g[t].data[i];
            m1[t].data[i] = beta1_ * m1[t].data[i] + (1.0 - beta1_) * gi;
            m2[t].data[i] = beta2_ * m2[t].data[i] + (1.0 - beta2_) * gi * gi;
            p[t].data[i] -= lr_ * (m1[t].data[i] / c1) / (std::sqrt(m2[t].data[i] / c2) + eps_);
        }
}

bool EarlyStopping::update(std::size_t epoch, double metric) {
    if (!started_ || metric > best_) {
        started_ = true;
        best_ = metric;
        best_epoch_ = epoch;
        since_best_ = 0;
        return false;
    }
    return ++since_best_ >= patience_;
}

namespace {

[[noreturn]] void diverged(const TrainOptions& options, std::size_t epoch, std::size_t batch, double loss,
                           const ModelParams& params, const Episode& episode) {
    std::string dump;
    if (!options.dump_dir.empty()) {
        nlohmann::json doc;
        doc["epoch"] = epoch;
        doc["batch"] = batch;
        doc["loss"] = std::isfinite(loss) ? nlohmann::json(loss) : nlohmann::json(std::to_string(loss));
        doc["episode_aspects"] = episode.aspects();
        auto copy = params;
        for (const auto& t : copy.tensors()) {
            double norm = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < t.size; ++i) {
                finite = finite && std::isfinite(t.data[i]);
                norm += t.data[i] * t.data[i];
            }
            doc["params"][t.name] = {{"finite", finite},
                                     {"norm", std::isfinite(norm) ? nlohmann::json(std::sqrt(norm)) : nlohmann::json(nullptr)}};
        }
        std::filesystem::create_directories(options.dump_dir);
        const auto path = options.dump_dir / "divergence_dump.json";
        std::ofstream(path) << doc.dump(2) << '\n';
        dump = path.string();
    }
    throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch),
                          dump);
}

}  // namespace

TrainingResult train(const TrainingConfig& config, Variant variant, const Corpus& corpus, const Encoder& encoder,
                     const AugmentedLabelSet* labels, const TrainOptions& options) {
    config.validate();
    if (config.fine_tune && !encoder.trainable())
        throw ConfigError("fine_tune requested but encoder '" + encoder.id() + "' has no trainable parameters");
    if (uses_label_guidance(variant) && !labels)
        throw ConfigError(std::string("ablation ") + to_string(variant) + " needs label texts");
    if (corpus.catalog().aspects_in(Split::train).empty() || corpus.catalog().aspects_in(Split::valid).empty())
        throw ConfigError("training needs non-empty train and valid splits");

    const EpisodeEmbedder embedder(corpus, encoder, uses_label_guidance(variant) ? labels : nullptr);
    const ForwardOptions forward{variant, false};
    const auto shape = config.shape();
    const auto val_episodes = episode_stream(corpus, Split::valid, shape, config.val_episodes, config.val_seed);

    Rng master(config.seed);
    auto params = ModelParams::initialize(encoder.dim(), config.repeat, master);
    Optimizer optimizer(config, params);
    EarlyStopping stopper(config.patience);
    TrainingResult result;
    result.params = params;
    const bool has_parameters = variant != Variant::proto;
    const auto batch_size = config.resolved_batch_size();
    const auto epochs = has_parameters ? config.max_epochs : 1;

    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        EpochLog log;
        log.epoch = epoch;
        if (has_parameters) {
            const auto episodes = episode_stream(corpus, Split::train, shape, config.episodes_per_epoch, master());
            double loss_sum = 0.0;
            for (std::size_t start = 0, batch = 0; start < episodes.size(); start += batch_size, ++batch) {
                const auto count = std::min(batch_size, episodes.size() - start);
                std::vector<ModelParams> grads(count);
                std::vector<double> losses(count);
                parallel_for(count, config.threads, [&](std::size_t i) {
                    const auto& ep = episodes[start + i];
                    grads[i] = episode_gradient(params, embedder.embed(ep), embedder.gold(ep), forward, &losses[i]);
                });
                ModelParams total = grads.front();
                for (std::size_t i = 1; i < count; ++i) total += grads[i];
                total *= 1.0 / static_cast<double>(count);
                double batch_loss = 0.0;
                for (auto l : losses) batch_loss += l;
                if (!std::isfinite(batch_loss) || !total.all_finite())
                    diverged(options, epoch, batch, batch_loss, params, episodes[start]);
                optimizer.step(params, total);
                if (!params.all_finite()) diverged(options, epoch, batch, batch_loss, params, episodes[start]);
                loss_sum += batch_loss;
            }
            log.train_loss = loss_sum / static_cast<double>(episodes.size());
        }
        const auto report = evaluate(params, forward, embedder, val_episodes, config.tau, config.auc_mode, config.threads);
        log.val_auc = report.auc;
        log.val_macro_f1 = report.macro_f1;
        log.val_skipped = report.skipped;
        result.log.push_back(log);
        const bool stop = stopper.update(epoch, report.auc);
        if (stopper.improved_last()) {
            result.params = params;
            result.best_epoch = epoch;
            result.best_val_auc = report.auc;
        }
        if (options.on_epoch) options.on_epoch(log);
        if (stop) break;
    }
    std::ostringstream state;
    state << master;
    result.rng_state = state.str();
    return result;
}

// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const ModelParams& params, const EpisodeInputs& inputs,
                                   const std::vector<LabelBits>& gold, const ForwardOptions& options, double tolerance,
                                   double step, const std::function<void(ModelParams&)>& corrupt) {
    auto analytic = episode_gradient(params, inputs, gold, options);
    if (corrupt) corrupt(analytic);
    auto probe = params;
    auto probe_views = probe.tensors();
    const auto grad_views = analytic.tensors();
    GradientCheckReport report;
    for (std::size_t t = 0; t < probe_views.size(); ++t) {
        const auto& view = probe_views[t];
        double max_diff = 0.0, scale = 1e-6;
        for (std::size_t i = 0; i < view.size; ++i) {
            const double saved = view.data[i];
            view.data[i] = saved + step;
            const double up = episode_objective(probe, inputs, gold, options);
            view.data[i] = saved - step;
            const double down = episode_objective(probe, inputs, gold, options);
            view.data[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = grad_views[t].data[i];
            max_diff = std::max(max_diff, std::abs(a - numeric));
            scale = std::max({scale, std::abs(a), std::abs(numeric)});
        }
        TensorCheck check{view.name, max_diff / scale, false};
        check.passed = std::isfinite(check.max_relative_error) && check.max_relative_error < tolerance;
        report.passed = report.passed && check.passed;
        report.tensors.push_back(check);
    }
    return report;
}

}  // namespace slwla
