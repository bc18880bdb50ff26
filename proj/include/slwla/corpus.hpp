#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slwla/rng.hpp"

namespace slwla {

using AspectId = std::string;

struct LabeledSentence {
    std::string id;
    std::string text;
    std::vector<std::string> tokens;  // whitespace pre-split; the encoder does its own tokenisation
    std::vector<AspectId> aspects;    // sorted, unique, non-empty

    std::size_t length() const noexcept { return tokens.size(); }
    bool has_aspect(const AspectId& aspect) const;
};

enum class Split { train, valid, test };

const char* to_string(Split split) noexcept;
Split parse_split(const std::string& name);

struct AspectCatalog {
    std::map<AspectId, std::string> names;  // aspect id -> label-name text
    std::map<AspectId, Split> split;        // aspects without an entry belong to no split

    bool contains(const AspectId& aspect) const { return names.count(aspect) != 0; }
    const std::string& label_name(const AspectId& aspect) const;
    std::vector<AspectId> aspects_in(Split s) const;
    std::vector<AspectId> all_aspects() const;

    /// Throws ValidationError on empty names or split entries naming unknown aspects.
    void validate() const;
};

/// Immutable after construction; safe to share across threads.
class Corpus {
public:
    Corpus() = default;
    Corpus(AspectCatalog catalog, std::vector<LabeledSentence> sentences);

    const AspectCatalog& catalog() const noexcept { return catalog_; }
    const std::vector<LabeledSentence>& sentences() const noexcept { return sentences_; }
    const LabeledSentence& sentence(std::size_t index) const { return sentences_.at(index); }
    std::size_t size() const noexcept { return sentences_.size(); }
    bool empty() const noexcept { return sentences_.empty(); }

    /// Indices of sentences whose gold aspects include `aspect`, ascending.
    const std::vector<std::size_t>& sentences_with(const AspectId& aspect) const;

    Corpus with_catalog(AspectCatalog catalog) const;

private:
    AspectCatalog catalog_;
    std::vector<LabeledSentence> sentences_;
    std::map<AspectId, std::vector<std::size_t>> by_aspect_;
};

/// Parses line-delimited {id, text, aspects} records. When `known` is given, aspect ids must
/// belong to it and its names/splits are adopted; otherwise the catalog is built from the data.
Corpus parse_corpus(std::istream& in, const std::string& source_name,
                    const AspectCatalog* known = nullptr);
Corpus load_corpus(const std::filesystem::path& path, const AspectCatalog* known = nullptr);
void write_corpus(std::ostream& out, const Corpus& corpus);

struct SplitCounts {
    std::size_t train = 64;
    std::size_t valid = 16;
    std::size_t test = 20;
};

/// Deterministic disjoint split of the catalog's aspects; aspects beyond the requested total
/// are left unassigned.
AspectCatalog split_aspects(const AspectCatalog& catalog, SplitCounts counts, std::uint64_t seed,
                            std::size_t min_per_split = 1);

/// Split file: {"train": [...], "valid": [...], "test": [...], "names": {id: name}}.
AspectCatalog load_split_file(const std::filesystem::path& path, const AspectCatalog& base);
void save_split_file(const std::filesystem::path& path, const AspectCatalog& catalog);

struct LengthBucket {
    double mean_aspects = 0.0;
    std::size_t count = 0;
};

struct CorpusStats {
    std::map<std::size_t, LengthBucket> buckets;  // keyed by whitespace token length
    std::size_t sample_size = 0;
};

CorpusStats corpus_stats(const Corpus& corpus, std::size_t sample_size, Rng& rng);

}  // namespace slwla
