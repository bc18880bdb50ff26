// Command-line front end: augment-labels, train, evaluate, report, sample-episode,
// plus corpus-stats and synth-corpus helpers.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slwla/commands.hpp"
#include "slwla/error.hpp"

namespace {

using Overrides = std::map<std::string, std::string>;

struct Common {
    std::string config_file;
    Overrides overrides;
    std::vector<std::string> sets;
};

void bind_key(CLI::App* sub, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov[key] = v; }, help);
}

void add_common(CLI::App* sub, Common& c, bool training_flags) {
    sub->add_option("--config", c.config_file, "key = value config file");
    sub->add_option("--set", c.sets, "override any config key (key=value), repeatable");
    bind_key(sub, c.overrides, "--data", "corpus", "corpus JSONL file");
    bind_key(sub, c.overrides, "--split-file", "split_file", "aspect split file");
    bind_key(sub, c.overrides, "--encoder", "encoder", "encoder name, e.g. mock:0");
    bind_key(sub, c.overrides, "--mlm-rig", "mlm_rig", "mock MLM rig table (JSON)");
    bind_key(sub, c.overrides, "--dim", "d", "embedding dimension");
    bind_key(sub, c.overrides, "--max-len", "max_len", "maximum tokens per sentence");
    bind_key(sub, c.overrides, "--cache-dir", "cache_dir", "embedding cache directory");
    bind_key(sub, c.overrides, "--n-way", "n_way", "classes per episode");
    bind_key(sub, c.overrides, "--k-shot", "k_shot", "support sentences per class");
    if (!training_flags) return;
    bind_key(sub, c.overrides, "--labels", "labels_file", "augmented-label file");
    bind_key(sub, c.overrides, "--ablation", "ablation", "proto | slw | slw-las | slwla");
    bind_key(sub, c.overrides, "--out", "output_dir", "output directory");
    bind_key(sub, c.overrides, "--seed", "seed", "training seed");
    bind_key(sub, c.overrides, "--threads", "threads", "worker threads");
}

slwla::RunConfig resolve(const Common& c) {
    auto ov = c.overrides;
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw slwla::ConfigError("--set expects key=value, got '" + s + "'");
        ov[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return slwla::resolve_config(c.config_file, ov);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Few-shot multi-label aspect category detection with attention-weighted prototypes"};
    app.require_subcommand(1);

    Common aug_c, train_c, eval_c, sample_c, stats_c;

    auto* aug = app.add_subcommand("augment-labels", "predict extra label words with the MLM head");
    add_common(aug, aug_c, false);
    bind_key(aug, aug_c.overrides, "--out", "labels_file", "augmented-label file to write");
    bind_key(aug, aug_c.overrides, "--m", "m", "words appended per label");
    bind_key(aug, aug_c.overrides, "--sentences-per-class", "sentences_per_class", "sentences sampled per aspect");
    bind_key(aug, aug_c.overrides, "--seed", "augment_seed", "sampling seed");
    std::vector<std::string> aug_splits{"train", "valid", "test"};
    aug->add_option("--splits", aug_splits, "splits whose aspects are augmented");

    auto* tr = app.add_subcommand("train", "episodic training with early stopping");
    add_common(tr, train_c, true);

    auto* ev = app.add_subcommand("evaluate", "score a checkpoint on fixed-seed test episodes");
    std::string checkpoint;
    ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    add_common(ev, eval_c, true);

    auto* rep = app.add_subcommand("report", "render results stores as a table");
    std::vector<std::string> stores;
    std::string format = "text";
    rep->add_option("stores", stores, "results.jsonl files")->required();
    rep->add_option("--format", format, "text | csv | json");

    auto* smp = app.add_subcommand("sample-episode", "print one sampled episode");
    add_common(smp, sample_c, false);
    bind_key(smp, sample_c.overrides, "--queries-per-class", "queries_per_class", "queries per class");
    std::string split_name = "train";
    std::optional<std::size_t> query_total;
    std::uint64_t sample_seed = 0;
    smp->add_option("--split", split_name, "train | valid | test");
    smp->add_option("--queries", query_total, "total queries (overrides queries per class)");
    smp->add_option("--seed", sample_seed, "sampling seed");

    auto* st = app.add_subcommand("corpus-stats", "mean aspect count per sentence length");
    add_common(st, stats_c, false);
    std::size_t stats_sample = 2000;
    std::uint64_t stats_seed = 0;
    st->add_option("--sample", stats_sample, "sentences sampled");
    st->add_option("--seed", stats_seed, "sampling seed");

    auto* syn = app.add_subcommand("synth-corpus", "write a synthetic keyword corpus with rig and split");
    slwla::SyntheticSpec spec;
    slwla::SplitCounts counts{20, 5, 5};
    std::uint64_t split_seed = 0;
    std::string syn_dir;
    syn->add_option("--out", syn_dir, "output directory")->required();
    syn->add_option("--aspects", spec.aspects, "number of aspects");
    syn->add_option("--sentences-per-aspect", spec.sentences_per_aspect, "sentences per target aspect");
    syn->add_option("--keywords", spec.keywords_per_aspect, "keywords per aspect");
    syn->add_option("--seed", spec.seed, "generator seed");
    syn->add_option("--train", counts.train, "train aspects");
    syn->add_option("--valid", counts.valid, "validation aspects");
    syn->add_option("--test", counts.test, "test aspects");
    syn->add_option("--split-seed", split_seed, "split seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(slwla::ExitCode::usage);
    }

    try {
        if (*aug) {
            std::vector<slwla::Split> splits;
            for (const auto& s : aug_splits) splits.push_back(slwla::parse_split(s));
            slwla::cmd_augment_labels(resolve(aug_c), splits, std::cout);
        } else if (*tr) {
            slwla::cmd_train(resolve(train_c), std::cout);
        } else if (*ev) {
            auto ov = eval_c.overrides;
            if (!eval_c.config_file.empty())
                for (const auto& [k, v] : slwla::load_key_values(eval_c.config_file)) ov.emplace(k, v);
            for (const auto& s : eval_c.sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw slwla::ConfigError("--set expects key=value, got '" + s + "'");
                ov[s.substr(0, eq)] = s.substr(eq + 1);
            }
            slwla::cmd_evaluate(checkpoint, ov, std::cout);
        } else if (*rep) {
            std::vector<std::filesystem::path> paths(stores.begin(), stores.end());
            slwla::cmd_report(paths, slwla::parse_report_format(format), std::cout);
        } else if (*smp) {
            slwla::cmd_sample_episode(resolve(sample_c), slwla::parse_split(split_name), query_total, sample_seed,
                                      std::cout);
        } else if (*st) {
            slwla::cmd_corpus_stats(resolve(stats_c), stats_sample, stats_seed, std::cout);
        } else if (*syn) {
            slwla::cmd_synth_corpus(spec, counts, split_seed, syn_dir, std::cout);
        }
    } catch (const slwla::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(slwla::ExitCode::environment);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(slwla::ExitCode::environment);
    }
    return 0;
}
