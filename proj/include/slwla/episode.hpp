#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "slwla/corpus.hpp"

namespace slwla {

struct SupportClass {
    AspectId aspect;
    std::vector<std::size_t> sentences;  // corpus indices, K of them
};

struct QueryItem {
    std::size_t sentence = 0;            // corpus index
    std::vector<std::uint8_t> labels;    // N bits over the episode's aspects
};

/// One N-way K-shot meta-task. Sentences are referenced by index into the sampling corpus.
struct Episode {
    std::size_t way = 0;
    std::size_t shot = 0;
    std::vector<SupportClass> support;
    std::vector<QueryItem> query;

    std::vector<AspectId> aspects() const;
    bool operator==(const Episode&) const = default;
};

bool operator==(const SupportClass& a, const SupportClass& b);
bool operator==(const QueryItem& a, const QueryItem& b);

struct EpisodeShape {
    std::size_t way = 5;
    std::size_t shot = 5;
    std::size_t queries_per_class = 5;
    std::optional<std::size_t> query_total;  // overrides queries_per_class * way

    std::size_t query_count() const { return query_total.value_or(queries_per_class * way); }
};

/// Gold aspects of `sentence` masked to the episode aspect order.
std::vector<std::uint8_t> mask_labels(const LabeledSentence& sentence,
                                      const std::vector<AspectId>& episode_aspects);

/// Throws ValidationError when any Episode invariant is violated.
void validate_episode(const Episode& episode, const Corpus& corpus);

/// Uniform sampling without replacement: N aspects from the split, K support sentences per
/// aspect, then M queries from sentences carrying at least one episode aspect.
Episode sample_episode(const Corpus& corpus, Split split, const EpisodeShape& shape, Rng& rng);

/// `n_tasks` episodes drawn from a stream seeded by `epoch_seed`.
std::vector<Episode> episode_stream(const Corpus& corpus, Split split, const EpisodeShape& shape,
                                    std::size_t n_tasks, std::uint64_t epoch_seed);

/// Human-readable dump: support classes with their sentences, then queries with label bits.
void print_episode(std::ostream& out, const Episode& episode, const Corpus& corpus);

}  // namespace slwla
