#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "slwla/corpus.hpp"
#include "slwla/encoder.hpp"

namespace slwla {

/// Version tag of the shipped stop-word list; bump when the list changes.
inline constexpr const char* stop_word_list_version = "en-1";

const std::vector<std::string>& stop_words();
bool is_stop_word(std::string_view word);

struct AugmentedLabel {
    AspectId aspect;
    std::string original;
    std::vector<std::string> words;
    std::string combined;
    std::size_t m = 0;

    bool operator==(const AugmentedLabel&) const = default;
};

/// Per-sentence ranked candidates plus aggregate counts (number of sentences proposing a word).
struct CandidateTable {
    std::vector<std::vector<std::string>> per_sentence;
    std::map<std::string, std::size_t> counts;
    std::map<std::string, std::size_t> first_seen;

    /// Recomputes counts and first_seen from per_sentence.
    void rebuild();
};

/// "<sentence>. It is about <label>, and its synonym is <mask>." without doubling a
/// sentence-final period.
std::string build_prompt(std::string_view sentence, std::string_view label_name,
                         std::string_view mask_token = "[MASK]");

CandidateTable collect_candidates(const Corpus& corpus, const AspectId& aspect,
                                  std::size_t sentences_per_class, std::size_t top_k_per_sentence,
                                  const Encoder& encoder, Rng& rng);

/// Lower-cases, then drops stop words, non-alphabetic tokens and tokens of the label name.
CandidateTable filter_candidates(const CandidateTable& table, std::string_view label_name);

/// The m most frequent words; ties broken lexicographically, then by first appearance.
std::vector<std::string> select_top_m(const CandidateTable& table, std::size_t m);

AugmentedLabel augment_label(std::string_view name, const std::vector<std::string>& words);

/// Label names split on '_' and whitespace, lower-cased.
std::vector<std::string> label_tokens(std::string_view label_name);

struct AugmentationSettings {
    std::size_t m = 1;
    std::size_t sentences_per_class = 2000;
    std::uint64_t seed = 0;
};

struct AugmentedLabelSet {
    std::string encoder_id;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    std::map<AspectId, AugmentedLabel> labels;
    std::map<AspectId, CandidateTable> tables;  // filtered tables, not persisted

    const AugmentedLabel& at(const AspectId& aspect) const;
};

/// Runs collect -> filter -> select -> augment for each aspect. The per-aspect rng stream is
/// derived from (seed, aspect id) so results do not depend on aspect order.
AugmentedLabelSet augment_labels(const Corpus& corpus, const std::vector<AspectId>& aspects,
                                 const Encoder& encoder, const AugmentationSettings& settings);

/// Label set with no appended words (m = 0): combined text equals the original name.
AugmentedLabelSet plain_labels(const AspectCatalog& catalog, const std::string& encoder_id);

void save_augmented_labels(const std::filesystem::path& path, const AugmentedLabelSet& set);
AugmentedLabelSet load_augmented_labels(const std::filesystem::path& path);

}  // namespace slwla
