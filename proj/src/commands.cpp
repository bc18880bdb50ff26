#include "slwla/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "slwla/checkpoint.hpp"
#include "slwla/error.hpp"
#include "slwla/hash.hpp"
#include "slwla/training.hpp"

namespace slwla {

namespace fs = std::filesystem;

namespace {

fs::path default_split_path(const fs::path& corpus) {
    auto p = corpus;
    p += ".split.json";
    return p;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw EnvironmentError("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw EnvironmentError("write to '" + path.string() + "' failed");
    }
    fs::rename(tmp, path);
}

std::string snapshot_text(const std::map<std::string, std::string>& kv) {
    std::ostringstream os;
    write_key_values(os, kv);
    return os.str();
}

nlohmann::json epoch_json(const EpochLog& e) {
    return {{"epoch", e.epoch},
            {"train_loss", e.train_loss},
            {"val_auc", e.val_auc},
            {"val_macro_f1", e.val_macro_f1},
            {"val_skipped", e.val_skipped}};
}

std::vector<AspectId> split_aspect_list(const AspectCatalog& catalog, const std::vector<Split>& splits) {
    std::vector<AspectId> out;
    for (auto s : splits) {
        auto part = catalog.aspects_in(s);
        out.insert(out.end(), part.begin(), part.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string join(const std::vector<std::string>& words, const char* sep) {
    std::string s;
    for (const auto& w : words) s += (s.empty() ? "" : sep) + w;
    return s;
}

}  // namespace

Corpus load_run_corpus(const RunConfig& cfg) {
    if (cfg.corpus.empty()) throw ConfigError("no corpus given (set corpus or pass --data)");
    if (!fs::exists(cfg.corpus)) throw ConfigError("corpus file '" + cfg.corpus.string() + "' does not exist");
    auto corpus = load_corpus(cfg.corpus);
    const auto split_path = cfg.split_file.empty() ? default_split_path(cfg.corpus) : cfg.split_file;
    AspectCatalog catalog;
    if (fs::exists(split_path)) {
        catalog = load_split_file(split_path, corpus.catalog());
    } else if (!cfg.split_file.empty()) {
        throw ConfigError("split file '" + split_path.string() + "' does not exist");
    } else {
        catalog = split_aspects(corpus.catalog(), cfg.split_counts, cfg.split_seed);
        save_split_file(split_path, catalog);
    }
    return corpus.with_catalog(std::move(catalog));
}

RunEncoder::RunEncoder(const RunConfig& cfg) {
    std::shared_ptr<const Encoder> base = make_encoder(cfg.encoder_options());
    fs::path dir = cfg.cache_dir;
    if (dir.empty())
        if (const char* env = std::getenv(cache_dir_env); env && *env) dir = env;
    if (dir.empty()) {
        encoder_ = std::move(base);
        return;
    }
    std::ostringstream name;
    name << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(base->id()) << ".emb";
    cache_file_ = dir / name.str();
    EmbeddingCache cache;
    if (fs::exists(cache_file_)) cache = EmbeddingCache::load(cache_file_);
    caching_ = std::make_shared<const CachingEncoder>(std::move(base), std::move(cache));
    encoder_ = caching_;
}

RunEncoder::~RunEncoder() {
    try {
        flush();
    } catch (...) {
        // a cache that cannot be written only costs recomputation next time
    }
}

void RunEncoder::flush() const {
    if (!caching_) return;
    fs::create_directories(cache_file_.parent_path());
    caching_->snapshot().save(cache_file_);
}

AugmentedLabelSet cmd_augment_labels(const RunConfig& cfg, const std::vector<Split>& splits, std::ostream& out) {
    if (cfg.labels_file.empty()) throw ConfigError("augment-labels needs an output path (labels_file / --out)");
    const auto corpus = load_run_corpus(cfg);
    RunEncoder encoder(cfg);
    auto aspects = split_aspect_list(corpus.catalog(), splits);
    if (aspects.empty()) throw ConfigError("the requested splits contain no aspects");

    AugmentationSettings settings{cfg.training.m, cfg.sentences_per_class, cfg.augment_seed};
    auto set = augment_labels(corpus, aspects, encoder.get(), settings);
    save_augmented_labels(cfg.labels_file, set);
    encoder.flush();

    std::size_t width = std::string("Label Name").size();
    for (const auto& a : aspects) width = std::max(width, set.at(a).original.size());
    out << std::left << std::setw(static_cast<int>(width)) << "Label Name" << " | Predicted Words | Augmented\n";
    for (const auto& a : aspects) {
        const auto& label = set.at(a);
        std::vector<std::string> predicted;
        if (auto it = set.tables.find(a); it != set.tables.end())
            predicted = select_top_m(it->second, 6);
        out << std::setw(static_cast<int>(width)) << label.original << " | " << join(predicted, ", ") << " | "
            << label.combined << '\n';
    }
    out << std::right << "wrote " << aspects.size() << " labels (m=" << set.m << ") to " << cfg.labels_file.string()
        << '\n';
    return set;
}

std::optional<AugmentedLabelSet> labels_for_variant(const RunConfig& cfg, const Corpus& corpus,
                                                    const std::string& encoder_id) {
    std::optional<AugmentedLabelSet> set;
    switch (cfg.ablation) {
        case Variant::proto:
        case Variant::slw:
            return std::nullopt;
        case Variant::slw_las:
            if (cfg.labels_file.empty()) {
                set = plain_labels(corpus.catalog(), encoder_id);
            } else {
                set = load_augmented_labels(cfg.labels_file);
                if (set->m != 0)
                    throw ConfigError("ablation slw-las requires m=0 labels, but '" + cfg.labels_file.string() +
                                      "' has m=" + std::to_string(set->m));
            }
            break;
        case Variant::slwla:
            if (cfg.labels_file.empty()) throw ConfigError("ablation slwla requires an augmented-label file");
            set = load_augmented_labels(cfg.labels_file);
            if (set->m < 1)
                throw ConfigError("ablation slwla requires labels with m >= 1, but '" + cfg.labels_file.string() +
                                  "' has m=0");
            break;
    }
    for (auto s : {Split::train, Split::valid, Split::test})
        for (const auto& a : corpus.catalog().aspects_in(s))
            if (!set->labels.count(a))
                throw ConfigError("label file has no entry for aspect '" + a + "' (" + to_string(s) + " split)");
    return set;
}

TrainOutputs cmd_train(const RunConfig& cfg_in, std::ostream& out) {
    RunConfig cfg = cfg_in;
    cfg.training.validate();
    // Label-file checks come first: a bad ablation/label pairing must fail before any compute.
    if (cfg.ablation == Variant::slwla && cfg.labels_file.empty())
        throw ConfigError("ablation slwla requires an augmented-label file");
    if (cfg.ablation == Variant::slwla || (cfg.ablation == Variant::slw_las && !cfg.labels_file.empty())) {
        const auto probe = load_augmented_labels(cfg.labels_file);
        if (cfg.ablation == Variant::slwla && probe.m < 1)
            throw ConfigError("ablation slwla requires labels with m >= 1, but '" + cfg.labels_file.string() +
                              "' has m=0");
        if (cfg.ablation == Variant::slw_las && probe.m != 0)
            throw ConfigError("ablation slw-las requires m=0 labels, but '" + cfg.labels_file.string() +
                              "' has m=" + std::to_string(probe.m));
    }

    const auto corpus = load_run_corpus(cfg);
    RunEncoder encoder(cfg);
    const auto labels = labels_for_variant(cfg, corpus, encoder.get().id());
    cfg.training.m = labels ? labels->m : 0;

    fs::create_directories(cfg.output_dir);
    TrainOutputs outputs;
    outputs.config_snapshot = cfg.output_dir / "config.resolved";
    outputs.log = cfg.output_dir / "train_log.jsonl";
    outputs.checkpoint = cfg.output_dir / "checkpoint.bin";
    const auto snapshot = cfg.to_key_values();
    write_text_atomic(outputs.config_snapshot, snapshot_text(snapshot));

    TrainOptions options;
    options.dump_dir = cfg.output_dir;
    options.on_epoch = [&](const EpochLog& e) {
        out << "epoch " << e.epoch << "  loss " << std::fixed << std::setprecision(6) << e.train_loss << "  val_auc "
            << std::setprecision(4) << e.val_auc << "  val_f1 " << std::setprecision(2) << e.val_macro_f1 << '\n'
            << std::defaultfloat;
    };
    outputs.result = train(cfg.training, cfg.ablation, corpus, encoder.get(), labels ? &*labels : nullptr, options);
    encoder.flush();

    std::string log_text;
    for (const auto& e : outputs.result.log) log_text += epoch_json(e).dump() + "\n";
    write_text_atomic(outputs.log, log_text);

    Checkpoint ckp;
    ckp.config = snapshot;
    ckp.encoder_id = encoder.get().id();
    ckp.variant = cfg.ablation;
    ckp.m = cfg.training.m;
    if (labels)
        for (const auto& [a, l] : labels->labels) ckp.label_texts[a] = l.combined;
    ckp.params = outputs.result.params;
    ckp.best_epoch = outputs.result.best_epoch;
    ckp.best_val_auc = outputs.result.best_val_auc;
    ckp.rng_state = outputs.result.rng_state;
    ckp.log = outputs.result.log;
    save_checkpoint(outputs.checkpoint, ckp);
    out << "best epoch " << ckp.best_epoch << " (val AUC " << std::fixed << std::setprecision(4) << ckp.best_val_auc
        << std::defaultfloat << "), checkpoint " << outputs.checkpoint.string() << '\n';
    return outputs;
}

ResultRecord cmd_evaluate(const fs::path& checkpoint_path, const std::map<std::string, std::string>& overrides,
                          std::ostream& out) {
    if (!fs::exists(checkpoint_path))
        throw ConfigError("checkpoint '" + checkpoint_path.string() + "' does not exist");
    const auto ckp = load_checkpoint(checkpoint_path);
    RunConfig cfg;
    cfg.apply(ckp.config);
    cfg.apply(overrides);
    if (cfg.ablation != ckp.variant)
        throw CompatibilityError("checkpoint holds a " + std::string(to_string(ckp.variant)) +
                                 " model but the config says " + to_string(cfg.ablation));
    cfg.training.validate();

    const auto corpus = load_run_corpus(cfg);
    RunEncoder encoder(cfg);
    if (encoder.get().id() != ckp.encoder_id)
        throw CompatibilityError("checkpoint was trained with encoder '" + ckp.encoder_id + "' but '" +
                                 encoder.get().id() + "' is configured");
    if (static_cast<std::size_t>(ckp.params.W.rows()) != encoder.get().dim())
        throw CompatibilityError("checkpoint dimension does not match the encoder");

    std::optional<AugmentedLabelSet> labels;
    if (uses_label_guidance(ckp.variant)) {
        labels.emplace();
        labels->encoder_id = ckp.encoder_id;
        labels->m = ckp.m;
        for (const auto& [a, text] : ckp.label_texts) {
            AugmentedLabel l;
            l.aspect = a;
            l.original = text;
            l.combined = text;
            l.m = ckp.m;
            labels->labels[a] = l;
        }
        for (const auto& a : corpus.catalog().aspects_in(Split::test))
            if (!labels->labels.count(a))
                throw CompatibilityError("checkpoint has no label text for test aspect '" + a + "'");
    }

    const auto& t = cfg.training;
    const auto episodes = episode_stream(corpus, Split::test, t.shape(), t.test_episodes, t.test_seed);
    EpisodeEmbedder embedder(corpus, encoder.get(), labels ? &*labels : nullptr);
    const auto report =
        evaluate(ckp.params, ForwardOptions{ckp.variant, false}, embedder, episodes, t.tau, t.auc_mode, t.threads);
    encoder.flush();

    ResultRecord rec;
    rec.way = t.way;
    rec.shot = t.shot;
    rec.ablation = ckp.variant;
    rec.m = ckp.m;
    rec.auc = report.auc;
    rec.macro_f1 = report.macro_f1;
    rec.episodes = report.episodes;
    rec.skipped = report.skipped;
    rec.test_seed = t.test_seed;
    rec.checkpoint = fs::absolute(checkpoint_path).string();
    append_result(cfg.output_dir / "results.jsonl", rec);
    out << rec.scenario() << "  " << row_label({rec.ablation, rec.ablation == Variant::slwla ? rec.m : 0})
        << "  AUC " << std::fixed << std::setprecision(4) << rec.auc << "  macro-F1 " << std::setprecision(2)
        << rec.macro_f1 << std::defaultfloat << "  (" << rec.episodes << " episodes, " << rec.skipped
        << " without AUC)\n";
    return rec;
}

ReportFormat parse_report_format(const std::string& name) {
    if (name == "text") return ReportFormat::text;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw ConfigError("unknown report format '" + name + "' (expected text, csv or json)");
}

ResultsTable cmd_report(const std::vector<fs::path>& stores, ReportFormat format, std::ostream& out,
                        std::vector<Scenario> requested) {
    if (stores.empty()) throw ConfigError("report needs at least one results store");
    std::vector<ResultRecord> records;
    for (const auto& s : stores) {
        auto part = load_results(s);
        records.insert(records.end(), part.begin(), part.end());
    }
    if (records.empty()) throw ConfigError("results store is empty");
    ResultsTable table(records, std::move(requested));
    switch (format) {
        case ReportFormat::text: table.render_text(out); break;
        case ReportFormat::csv: table.render_csv(out); break;
        case ReportFormat::json: table.render_json(out); break;
    }
    return table;
}

Episode cmd_sample_episode(const RunConfig& cfg, Split split, std::optional<std::size_t> query_total,
                           std::uint64_t seed, std::ostream& out) {
    const auto corpus = load_run_corpus(cfg);
    auto shape = cfg.training.shape();
    shape.query_total = query_total;
    Rng rng(seed);
    auto episode = sample_episode(corpus, split, shape, rng);
    print_episode(out, episode, corpus);
    return episode;
}

void cmd_corpus_stats(const RunConfig& cfg, std::size_t sample_size, std::uint64_t seed, std::ostream& out) {
    if (cfg.corpus.empty()) throw ConfigError("no corpus given (set corpus or pass --data)");
    if (!fs::exists(cfg.corpus)) throw ConfigError("corpus file '" + cfg.corpus.string() + "' does not exist");
    const auto corpus = load_corpus(cfg.corpus);
    Rng rng(seed);
    const auto stats = corpus_stats(corpus, sample_size, rng);
    out << "sentences sampled: " << stats.sample_size << "\nlength  sentences  mean aspects\n";
    for (const auto& [len, b] : stats.buckets)
        out << std::setw(6) << len << "  " << std::setw(9) << b.count << "  " << std::fixed << std::setprecision(3)
            << b.mean_aspects << std::defaultfloat << '\n';
}

SyntheticCorpus cmd_synth_corpus(const SyntheticSpec& spec, SplitCounts counts, std::uint64_t split_seed,
                                 const fs::path& dir, std::ostream& out) {
    auto synth = make_synthetic_corpus(spec);
    fs::create_directories(dir);
    std::ostringstream corpus_text;
    write_corpus(corpus_text, synth.corpus);
    write_text_atomic(dir / "corpus.jsonl", corpus_text.str());
    save_mlm_rig(dir / "rig.json", synth.rig);
    const auto catalog = split_aspects(synth.corpus.catalog(), counts, split_seed);
    save_split_file(default_split_path(dir / "corpus.jsonl"), catalog);
    out << "wrote " << synth.corpus.size() << " sentences over " << synth.aspects.size() << " aspects to "
        << dir.string() << '\n';
    return synth;
}

}  // namespace slwla
