#include "slwla/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slwla/error.hpp"

namespace slwla {

using nlohmann::json;

bool LabeledSentence::has_aspect(const AspectId& aspect) const {
    return std::binary_search(aspects.begin(), aspects.end(), aspect);
}

const char* to_string(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "valid" || name == "validation" || name == "val") return Split::valid;
    if (name == "test") return Split::test;
    throw ConfigError("unknown split '" + name + "' (expected train, valid or test)");
}

const std::string& AspectCatalog::label_name(const AspectId& aspect) const {
    auto it = names.find(aspect);
    if (it == names.end()) throw ValidationError("unknown aspect id '" + aspect + "'");
    return it->second;
}

std::vector<AspectId> AspectCatalog::aspects_in(Split s) const {
    std::vector<AspectId> out;
    for (const auto& [aspect, where] : split)
        if (where == s) out.push_back(aspect);
    return out;
}

std::vector<AspectId> AspectCatalog::all_aspects() const {
    std::vector<AspectId> out;
    out.reserve(names.size());
    for (const auto& [aspect, name] : names) out.push_back(aspect);
    return out;
}

void AspectCatalog::validate() const {
    for (const auto& [aspect, name] : names) {
        if (aspect.empty()) throw ValidationError("empty aspect id in catalog");
        if (name.empty()) throw ValidationError("aspect '" + aspect + "' has an empty label name");
    }
    for (const auto& [aspect, where] : split)
        if (!contains(aspect))
            throw ValidationError("split assigns unknown aspect '" + aspect + "'");
}

Corpus::Corpus(AspectCatalog catalog, std::vector<LabeledSentence> sentences)
    : catalog_(std::move(catalog)), sentences_(std::move(sentences)) {
    catalog_.validate();
    std::sort(sentences_.begin(), sentences_.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < sentences_.size(); ++i) {
        const auto& s = sentences_[i];
        if (i > 0 && sentences_[i - 1].id == s.id)
            throw ValidationError("duplicate sentence id '" + s.id + "'");
        if (s.aspects.empty()) throw ValidationError("sentence '" + s.id + "' has no aspects");
        if (s.tokens.empty()) throw ValidationError("sentence '" + s.id + "' has no tokens");
        for (const auto& a : s.aspects) {
            if (!catalog_.contains(a))
                throw ValidationError("sentence '" + s.id + "' uses unknown aspect '" + a + "'");
            by_aspect_[a].push_back(i);
        }
    }
}

const std::vector<std::size_t>& Corpus::sentences_with(const AspectId& aspect) const {
    static const std::vector<std::size_t> none;
    auto it = by_aspect_.find(aspect);
    return it == by_aspect_.end() ? none : it->second;
}

Corpus Corpus::with_catalog(AspectCatalog catalog) const {
    return Corpus(std::move(catalog), sentences_);
}

namespace {

std::vector<std::string> whitespace_split(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name, const AspectCatalog* known) {
    std::vector<LabeledSentence> sentences;
    AspectCatalog catalog = known ? *known : AspectCatalog{};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source_name, line_no, std::string("malformed record: ") + e.what());
        }
        if (!record.is_object()) throw ParseError(source_name, line_no, "record is not an object");
        for (const char* field : {"id", "text", "aspects"})
            if (!record.contains(field))
                throw ParseError(source_name, line_no, std::string("missing field '") + field + "'");
        if (!record["id"].is_string() || !record["text"].is_string() || !record["aspects"].is_array())
            throw ParseError(source_name, line_no, "fields have the wrong type");

        LabeledSentence s;
        s.id = record["id"].get<std::string>();
        s.text = record["text"].get<std::string>();
        s.tokens = whitespace_split(s.text);
        std::set<AspectId> aspects;
        for (const auto& a : record["aspects"]) {
            if (!a.is_string() || a.get<std::string>().empty())
                throw ParseError(source_name, line_no, "aspect ids must be non-empty strings");
            aspects.insert(a.get<std::string>());
        }
        auto where = source_name + ":" + std::to_string(line_no) + ": ";
        if (s.id.empty()) throw ValidationError(where + "empty sentence id");
        if (s.tokens.empty()) throw ValidationError(where + "sentence '" + s.id + "' has no text");
        if (aspects.empty()) throw ValidationError(where + "sentence '" + s.id + "' has an empty aspect set");
        for (const auto& a : aspects) {
            if (known) {
                if (!known->contains(a))
                    throw ValidationError(where + "unknown aspect id '" + a + "'");
            } else {
                catalog.names.emplace(a, a);
            }
        }
        s.aspects.assign(aspects.begin(), aspects.end());
        sentences.push_back(std::move(s));
    }
    return Corpus(std::move(catalog), std::move(sentences));
}

Corpus load_corpus(const std::filesystem::path& path, const AspectCatalog* known) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read corpus file '" + path.string() + "'");
    return parse_corpus(in, path.string(), known);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& s : corpus.sentences()) {
        json record = {{"id", s.id}, {"text", s.text}, {"aspects", s.aspects}};
        out << record.dump() << '\n';
    }
}

AspectCatalog split_aspects(const AspectCatalog& catalog, SplitCounts counts, std::uint64_t seed,
                            std::size_t min_per_split) {
    const auto aspects = catalog.all_aspects();
    const std::size_t total = counts.train + counts.valid + counts.test;
    if (total > aspects.size())
        throw ConfigError("split counts " + std::to_string(counts.train) + "/" +
                          std::to_string(counts.valid) + "/" + std::to_string(counts.test) +
                          " exceed the " + std::to_string(aspects.size()) + " available aspects");
    if (counts.train < min_per_split || counts.valid < min_per_split || counts.test < min_per_split)
        throw ConfigError("every split needs at least " + std::to_string(min_per_split) + " aspects");

    Rng rng(seed);
    auto order = sample_without_replacement(aspects.size(), total, rng);
    AspectCatalog out;
    out.names = catalog.names;
    std::size_t i = 0;
    for (; i < counts.train; ++i) out.split[aspects[order[i]]] = Split::train;
    for (; i < counts.train + counts.valid; ++i) out.split[aspects[order[i]]] = Split::valid;
    for (; i < total; ++i) out.split[aspects[order[i]]] = Split::test;
    return out;
}

AspectCatalog load_split_file(const std::filesystem::path& path, const AspectCatalog& base) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read split file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    AspectCatalog out;
    out.names = base.names;
    if (doc.contains("names"))
        for (const auto& [aspect, name] : doc["names"].items()) out.names[aspect] = name.get<std::string>();
    std::set<AspectId> seen;
    for (Split s : {Split::train, Split::valid, Split::test}) {
        if (!doc.contains(to_string(s))) continue;
        for (const auto& a : doc[to_string(s)]) {
            auto aspect = a.get<std::string>();
            if (!seen.insert(aspect).second)
                throw ValidationError("aspect '" + aspect + "' appears in more than one split");
            if (!out.contains(aspect))
                throw ValidationError("split file names unknown aspect '" + aspect + "'");
            out.split[aspect] = s;
        }
    }
    out.validate();
    return out;
}

void save_split_file(const std::filesystem::path& path, const AspectCatalog& catalog) {
    json doc;
    for (Split s : {Split::train, Split::valid, Split::test}) doc[to_string(s)] = catalog.aspects_in(s);
    json names = json::object();
    for (const auto& [aspect, name] : catalog.names)
        if (name != aspect) names[aspect] = name;
    if (!names.empty()) doc["names"] = names;
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw EnvironmentError("cannot write split file '" + path.string() + "'");
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

CorpusStats corpus_stats(const Corpus& corpus, std::size_t sample_size, Rng& rng) {
    if (corpus.empty()) throw ValidationError("corpus_stats on an empty corpus");
    if (sample_size > corpus.size())
        throw ValidationError("sample size " + std::to_string(sample_size) + " exceeds corpus size " +
                              std::to_string(corpus.size()));
    CorpusStats stats;
    stats.sample_size = sample_size;
    std::map<std::size_t, double> sums;
    for (auto index : sample_without_replacement(corpus.size(), sample_size, rng)) {
        const auto& s = corpus.sentence(index);
        sums[s.length()] += static_cast<double>(s.aspects.size());
        stats.buckets[s.length()].count += 1;
    }
    for (auto& [len, bucket] : stats.buckets) bucket.mean_aspects = sums[len] / static_cast<double>(bucket.count);
    return stats;
}

}  // namespace slwla
