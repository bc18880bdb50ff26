#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slwla/corpus.hpp"
#include "slwla/encoder.hpp"

namespace slwla {

/// Generator settings for a keyword-driven corpus that a frozen mock encoder can separate.
/// Every aspect owns a few pseudo-words; a sentence is built around one target aspect plus
/// 0..2 noise aspects, and each aspect present adds its keywords and some filler, so longer
/// sentences carry more aspects.
struct SyntheticSpec {
    std::size_t aspects = 30;
    std::size_t sentences_per_aspect = 100;
    std::size_t keywords_per_aspect = 4;
    double lead_share = 0.9;        // chance an aspect present contributes its lead keyword
    std::size_t keywords_min = 0;   // further non-lead keyword tokens per aspect present
    std::size_t keywords_max = 2;
    std::size_t filler_min = 2;     // sentence-level filler tokens
    std::size_t filler_max = 4;
    std::size_t aspect_filler_max = 3;  // extra filler per aspect present, drawn from 1..max
    double noise_one = 0.35;   // probability of exactly one noise aspect
    double noise_two = 0.15;   // probability of exactly two
    double name_mention = 0.3; // chance the aspect's own name word appears next to its keywords
    double rig_boost = 8.0;    // MLM boost from an aspect's name word to its lead keyword
    std::uint64_t seed = 7;
};

struct SyntheticAspect {
    AspectId id;                    // "<group>_<stem>"
    std::string stem;
    std::vector<std::string> keywords;
};

struct SyntheticCorpus {
    Corpus corpus;
    std::vector<SyntheticAspect> aspects;
    MlmRig rig;  // stem -> lead keyword (and a weaker second keyword)
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

void save_mlm_rig(const std::filesystem::path& path, const MlmRig& rig);

}  // namespace slwla
