#include "slwla/label_augmentation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <json.hpp>

#include "slwla/error.hpp"
#include "slwla/hash.hpp"

namespace slwla {

using nlohmann::json;

const std::vector<std::string>& stop_words() {
    // Sorted; English function words plus a few review-domain fillers.
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w = {
            "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and",
            "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
            "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down",
            "during", "each", "else", "ever", "few", "for", "from", "further", "had", "has",
            "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his",
            "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more",
            "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "one",
            "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same",
            "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs",
            "them", "themselves", "then", "there", "these", "they", "thing", "things", "this",
            "those", "through", "to", "too", "under", "until", "up", "very", "was", "we", "were",
            "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
            "would", "you", "your", "yours", "yourself", "yourselves"};
        std::sort(w.begin(), w.end());
        return w;
    }();
    return words;
}

bool is_stop_word(std::string_view word) {
    const auto& w = stop_words();
    return std::binary_search(w.begin(), w.end(), word);
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_alphabetic(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) != 0;
    });
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void CandidateTable::rebuild() {
    counts.clear();
    first_seen.clear();
    std::size_t position = 0;
    for (const auto& words : per_sentence) {
        std::set<std::string> seen_here;
        for (const auto& w : words) {
            first_seen.emplace(w, position++);
            if (seen_here.insert(w).second) ++counts[w];
        }
    }
}

std::string build_prompt(std::string_view sentence, std::string_view label_name, std::string_view mask_token) {
    auto body = trim(sentence);
    if (body.empty()) throw ValidationError("build_prompt: empty sentence");
    if (trim(label_name).empty()) throw ValidationError("build_prompt: empty label name");
    const char last = body.back();
    if (last != '.' && last != '!' && last != '?') body += '.';
    return body + " It is about " + std::string(label_name) + ", and its synonym is " +
           std::string(mask_token) + ".";
}

CandidateTable collect_candidates(const Corpus& corpus, const AspectId& aspect, std::size_t sentences_per_class,
                                  std::size_t top_k_per_sentence, const Encoder& encoder, Rng& rng) {
    if (sentences_per_class == 0) throw ValidationError("sentences_per_class must be at least 1");
    const auto& pool = corpus.sentences_with(aspect);
    if (pool.empty()) throw ValidationError("aspect '" + aspect + "' has no sentences");
    const auto& label = corpus.catalog().label_name(aspect);
    CandidateTable table;
    for (auto i : sample_without_replacement(pool.size(), sentences_per_class, rng)) {
        const auto prompt = build_prompt(corpus.sentence(pool[i]).text, label, encoder.mask_token());
        std::vector<std::string> words;
        for (auto& c : encoder.mlm_predict(prompt, top_k_per_sentence)) words.push_back(lower(c.word));
        table.per_sentence.push_back(std::move(words));
    }
    table.rebuild();
    return table;
}

std::vector<std::string> label_tokens(std::string_view label_name) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : label_name) {
        if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(lower(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(lower(cur));
    return out;
}

CandidateTable filter_candidates(const CandidateTable& table, std::string_view label_name) {
    const auto name_tokens = label_tokens(label_name);
    const std::set<std::string> banned(name_tokens.begin(), name_tokens.end());
    CandidateTable out;
    for (const auto& words : table.per_sentence) {
        std::vector<std::string> kept;
        for (const auto& raw : words) {
            auto w = lower(raw);
            if (!is_alphabetic(w) || is_stop_word(w) || banned.count(w)) continue;
            kept.push_back(std::move(w));
        }
        out.per_sentence.push_back(std::move(kept));
    }
    out.rebuild();
    return out;
}

std::vector<std::string> select_top_m(const CandidateTable& table, std::size_t m) {
    std::vector<std::string> words;
    for (const auto& [w, count] : table.counts) words.push_back(w);
    std::sort(words.begin(), words.end(), [&](const std::string& a, const std::string& b) {
        const auto ca = table.counts.at(a), cb = table.counts.at(b);
        if (ca != cb) return ca > cb;
        if (a != b) return a < b;
        return table.first_seen.at(a) < table.first_seen.at(b);
    });
    words.resize(std::min(words.size(), m));
    return words;
}

AugmentedLabel augment_label(std::string_view name, const std::vector<std::string>& words) {
    AugmentedLabel out;
    out.original = std::string(name);
    out.words = words;
    out.m = words.size();
    out.combined = out.original;
    for (const auto& w : words) out.combined += "_" + w;
    return out;
}

const AugmentedLabel& AugmentedLabelSet::at(const AspectId& aspect) const {
    auto it = labels.find(aspect);
    if (it == labels.end()) throw ValidationError("no label text for aspect '" + aspect + "'");
    return it->second;
}

AugmentedLabelSet augment_labels(const Corpus& corpus, const std::vector<AspectId>& aspects,
                                 const Encoder& encoder, const AugmentationSettings& settings) {
    AugmentedLabelSet set;
    set.encoder_id = encoder.id();
    set.seed = settings.seed;
    set.m = settings.m;
    const auto top_k = std::max<std::size_t>(settings.m, 1);
    for (const auto& aspect : aspects) {
        const auto& name = corpus.catalog().label_name(aspect);
        Rng rng(derive_seed(settings.seed, fnv1a64(aspect)));
        auto raw = collect_candidates(corpus, aspect, settings.sentences_per_class, top_k, encoder, rng);
        auto filtered = filter_candidates(raw, name);
        auto label = augment_label(name, select_top_m(filtered, settings.m));
        label.aspect = aspect;
        set.labels.emplace(aspect, std::move(label));
        set.tables.emplace(aspect, std::move(filtered));
    }
    return set;
}

AugmentedLabelSet plain_labels(const AspectCatalog& catalog, const std::string& encoder_id) {
    AugmentedLabelSet set;
    set.encoder_id = encoder_id;
    for (const auto& [aspect, name] : catalog.names) {
        auto label = augment_label(name, {});
        label.aspect = aspect;
        set.labels.emplace(aspect, std::move(label));
    }
    return set;
}

void save_augmented_labels(const std::filesystem::path& path, const AugmentedLabelSet& set) {
    json labels = json::object();
    for (const auto& [aspect, l] : set.labels)
        labels[aspect] = {{"original", l.original}, {"words", l.words}, {"combined", l.combined},
                          {"m", l.m}, {"encoder", set.encoder_id}, {"seed", set.seed}};
    json doc = {{"format", "slwla-augmented-labels"}, {"version", 1}, {"encoder", set.encoder_id},
                {"seed", set.seed}, {"m", set.m}, {"stop_words", stop_word_list_version},
                {"labels", labels}};
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw EnvironmentError("cannot write '" + path.string() + "'");
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

AugmentedLabelSet load_augmented_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read augmented-label file '" + path.string() + "'");
    AugmentedLabelSet set;
    try {
        const auto doc = json::parse(in);
        if (doc.value("format", "") != "slwla-augmented-labels" || doc.value("version", 0) != 1)
            throw CompatibilityError("'" + path.string() + "' is not a version-1 augmented-label file");
        set.encoder_id = doc.at("encoder").get<std::string>();
        set.seed = doc.at("seed").get<std::uint64_t>();
        set.m = doc.at("m").get<std::size_t>();
        for (const auto& [aspect, entry] : doc.at("labels").items()) {
            AugmentedLabel l;
            l.aspect = aspect;
            l.original = entry.at("original").get<std::string>();
            l.words = entry.at("words").get<std::vector<std::string>>();
            l.combined = entry.at("combined").get<std::string>();
            l.m = entry.at("m").get<std::size_t>();
            if (l.combined != augment_label(l.original, l.words).combined)
                throw ValidationError("label '" + aspect + "': combined text disagrees with its words");
            set.labels.emplace(aspect, std::move(l));
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    return set;
}

}  // namespace slwla
