#include "slwla/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "slwla/error.hpp"
#include "slwla/label_augmentation.hpp"
#include "slwla/rng.hpp"

namespace slwla {

namespace {

const std::vector<std::string>& groups() {
    static const std::vector<std::string> g = {"food", "drinks", "service", "ambience", "location", "price"};
    return g;
}

const std::vector<std::string>& fillers() {
    static const std::vector<std::string> f = {
        "the",  "a",     "was",   "and",    "really", "very",  "we",    "i",      "it",   "this",
        "place", "had",  "got",   "they",   "our",    "with",  "for",   "but",    "so",   "just",
        "pretty", "quite", "there", "time",  "again",  "one",   "some",  "also",   "night", "friends"};
    return f;
}

std::string pseudo_word(Rng& rng, std::size_t syllables) {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
        w += consonants[rng() % consonants.size()];
        w += vowels[rng() % vowels.size()];
    }
    return w;
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec) {
    if (spec.aspects < 3 || spec.sentences_per_aspect == 0 || spec.keywords_per_aspect == 0)
        throw ConfigError("synthetic corpus needs at least 3 aspects, 1 sentence and 1 keyword per aspect");
    if (spec.keywords_min > spec.keywords_max || spec.filler_min > spec.filler_max)
        throw ConfigError("synthetic keyword/filler ranges must satisfy min <= max");
    if (spec.lead_share < 0 || spec.lead_share > 1) throw ConfigError("lead_share must lie in [0, 1]");
    if (spec.noise_one < 0 || spec.noise_two < 0 || spec.noise_one + spec.noise_two > 1.0)
        throw ConfigError("synthetic noise probabilities must be non-negative and sum to at most 1");

    Rng rng(spec.seed);
    std::set<std::string> used(fillers().begin(), fillers().end());
    used.insert(groups().begin(), groups().end());
    auto fresh = [&](std::size_t syllables) {
        for (;;) {
            auto w = pseudo_word(rng, syllables);
            if (!is_stop_word(w) && used.insert(w).second) return w;
        }
    };

    SyntheticCorpus out;
    AspectCatalog catalog;
    for (std::size_t a = 0; a < spec.aspects; ++a) {
        SyntheticAspect asp;
        asp.stem = fresh(2);
        asp.id = groups()[a % groups().size()] + "_" + asp.stem;
        for (std::size_t k = 0; k < spec.keywords_per_aspect; ++k) asp.keywords.push_back(fresh(3));
        out.rig[asp.stem][asp.keywords[0]] = spec.rig_boost;
        if (asp.keywords.size() > 1) out.rig[asp.stem][asp.keywords[1]] = spec.rig_boost / 2;
        catalog.names[asp.id] = asp.id;
        out.aspects.push_back(std::move(asp));
    }

    std::vector<LabeledSentence> sentences;
    std::size_t serial = 0;
    for (std::size_t target = 0; target < spec.aspects; ++target) {
        for (std::size_t s = 0; s < spec.sentences_per_aspect; ++s) {
            const double u = uniform01(rng);
            const std::size_t noise = u < spec.noise_two ? 2 : (u < spec.noise_two + spec.noise_one ? 1 : 0);
            std::vector<std::size_t> present = {target};
            while (present.size() < 1 + noise) {
                auto other = static_cast<std::size_t>(rng() % spec.aspects);
                if (std::find(present.begin(), present.end(), other) == present.end()) present.push_back(other);
            }
            std::vector<std::string> words;
            auto draw = [&](std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); };
            const auto filler_count = draw(spec.filler_min, spec.filler_max);
            for (std::size_t i = 0; i < filler_count; ++i) words.push_back(fillers()[rng() % fillers().size()]);
            for (auto idx : present) {
                const auto& asp = out.aspects[idx];
                const bool lead = uniform01(rng) < spec.lead_share;
                if (lead) words.push_back(asp.keywords[0]);
                auto others = draw(spec.keywords_min, spec.keywords_max);
                if (!lead && others == 0) others = 1;  // every aspect present leaves some trace
                for (std::size_t i = 0; i < others; ++i) {
                    if (asp.keywords.size() == 1)
                        words.push_back(asp.keywords[0]);
                    else
                        words.push_back(asp.keywords[1 + rng() % (asp.keywords.size() - 1)]);
                }
                if (uniform01(rng) < spec.name_mention) words.push_back(asp.stem);
                const auto extra = spec.aspect_filler_max ? draw(1, spec.aspect_filler_max) : 0;
                for (std::size_t i = 0; i < extra; ++i) words.push_back(fillers()[rng() % fillers().size()]);
            }
            std::shuffle(words.begin(), words.end(), rng);

            LabeledSentence sent;
            sent.id = "syn" + std::to_string(serial++);
            for (const auto& w : words) sent.text += (sent.text.empty() ? "" : " ") + w;
            sent.text += " .";
            for (auto idx : present) sent.aspects.push_back(out.aspects[idx].id);
            std::sort(sent.aspects.begin(), sent.aspects.end());
            sent.tokens = words;
            sent.tokens.push_back(".");
            sentences.push_back(std::move(sent));
        }
    }
    out.corpus = Corpus(std::move(catalog), std::move(sentences));
    return out;
}

void save_mlm_rig(const std::filesystem::path& path, const MlmRig& rig) {
    std::ofstream out(path);
    if (!out) throw EnvironmentError("cannot write rig file '" + path.string() + "'");
    out << nlohmann::json(rig).dump(2) << '\n';
}

}  // namespace slwla
