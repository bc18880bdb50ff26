#include "slwla/episode.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "slwla/error.hpp"

namespace slwla {

bool operator==(const SupportClass& a, const SupportClass& b) {
    return a.aspect == b.aspect && a.sentences == b.sentences;
}

bool operator==(const QueryItem& a, const QueryItem& b) {
    return a.sentence == b.sentence && a.labels == b.labels;
}

std::vector<AspectId> Episode::aspects() const {
    std::vector<AspectId> out;
    out.reserve(support.size());
    for (const auto& c : support) out.push_back(c.aspect);
    return out;
}

std::vector<std::uint8_t> mask_labels(const LabeledSentence& sentence,
                                      const std::vector<AspectId>& episode_aspects) {
    std::vector<std::uint8_t> bits(episode_aspects.size(), 0);
    for (std::size_t i = 0; i < episode_aspects.size(); ++i)
        bits[i] = sentence.has_aspect(episode_aspects[i]) ? 1 : 0;
    return bits;
}

void validate_episode(const Episode& episode, const Corpus& corpus) {
    if (episode.way == 0 || episode.shot == 0) throw ValidationError("episode with N=0 or K=0");
    if (episode.support.size() != episode.way)
        throw ValidationError("episode has " + std::to_string(episode.support.size()) +
                              " support classes, expected " + std::to_string(episode.way));
    std::set<AspectId> distinct;
    std::set<std::size_t> used;
    for (const auto& c : episode.support) {
        if (!distinct.insert(c.aspect).second)
            throw ValidationError("support aspect '" + c.aspect + "' repeated");
        if (c.sentences.size() != episode.shot)
            throw ValidationError("support class '" + c.aspect + "' does not hold K sentences");
        for (auto index : c.sentences) {
            if (!corpus.sentence(index).has_aspect(c.aspect))
                throw ValidationError("support sentence '" + corpus.sentence(index).id +
                                      "' lacks the class aspect '" + c.aspect + "'");
            if (!used.insert(index).second)
                throw ValidationError("sentence '" + corpus.sentence(index).id + "' used twice");
        }
    }
    const auto aspects = episode.aspects();
    for (const auto& q : episode.query) {
        const auto& s = corpus.sentence(q.sentence);
        if (!used.insert(q.sentence).second)
            throw ValidationError("sentence '" + s.id + "' used twice");
        if (q.labels != mask_labels(s, aspects))
            throw ValidationError("query '" + s.id + "' label bits disagree with its gold aspects");
        if (std::none_of(q.labels.begin(), q.labels.end(), [](auto b) { return b != 0; }))
            throw ValidationError("query '" + s.id + "' has an all-zero label vector");
    }
}

Episode sample_episode(const Corpus& corpus, Split split, const EpisodeShape& shape, Rng& rng) {
    if (shape.way == 0 || shape.shot == 0) throw ConfigError("N and K must be positive");
    if (shape.query_count() == 0) throw ConfigError("episodes need at least one query");
    const auto candidates = corpus.catalog().aspects_in(split);
    if (candidates.size() < shape.way)
        throw SamplingError(to_string(split), "split holds " + std::to_string(candidates.size()) +
                                                  " aspects, fewer than N=" + std::to_string(shape.way));

    Episode episode;
    episode.way = shape.way;
    episode.shot = shape.shot;
    std::set<std::size_t> used;
    for (auto pick : sample_without_replacement(candidates.size(), shape.way, rng)) {
        SupportClass cls{candidates[pick], {}};
        std::vector<std::size_t> pool;
        for (auto index : corpus.sentences_with(cls.aspect))
            if (!used.count(index)) pool.push_back(index);
        if (pool.size() < shape.shot)
            throw SamplingError(cls.aspect, "only " + std::to_string(pool.size()) +
                                                " unused sentences for K=" + std::to_string(shape.shot));
        for (auto i : sample_without_replacement(pool.size(), shape.shot, rng)) {
            cls.sentences.push_back(pool[i]);
            used.insert(pool[i]);
        }
        episode.support.push_back(std::move(cls));
    }

    const auto aspects = episode.aspects();
    std::set<std::size_t> query_pool;
    for (const auto& aspect : aspects)
        for (auto index : corpus.sentences_with(aspect))
            if (!used.count(index)) query_pool.insert(index);
    const std::vector<std::size_t> pool(query_pool.begin(), query_pool.end());
    if (pool.size() < shape.query_count()) {
        std::string names;
        for (const auto& a : aspects) names += (names.empty() ? "" : ",") + a;
        throw SamplingError(names, "only " + std::to_string(pool.size()) + " query candidates for M=" +
                                       std::to_string(shape.query_count()));
    }
    for (auto i : sample_without_replacement(pool.size(), shape.query_count(), rng))
        episode.query.push_back({pool[i], mask_labels(corpus.sentence(pool[i]), aspects)});
    return episode;
}

std::vector<Episode> episode_stream(const Corpus& corpus, Split split, const EpisodeShape& shape,
                                    std::size_t n_tasks, std::uint64_t epoch_seed) {
    if (n_tasks == 0) throw ConfigError("episode stream needs n_tasks >= 1");
    Rng rng(epoch_seed);
    std::vector<Episode> out;
    out.reserve(n_tasks);
    for (std::size_t t = 0; t < n_tasks; ++t) out.push_back(sample_episode(corpus, split, shape, rng));
    return out;
}

void print_episode(std::ostream& out, const Episode& episode, const Corpus& corpus) {
    const auto& catalog = corpus.catalog();
    out << episode.way << "-way " << episode.shot << "-shot episode\n";
    out << "Support set\n";
    for (std::size_t n = 0; n < episode.support.size(); ++n) {
        const auto& c = episode.support[n];
        out << "  (" << static_cast<char>('A' + n % 26) << ") " << catalog.label_name(c.aspect) << '\n';
        for (std::size_t k = 0; k < c.sentences.size(); ++k) {
            const auto& s = corpus.sentence(c.sentences[k]);
            out << "      (" << k + 1 << ") " << s.text << "   [";
            for (std::size_t a = 0; a < s.aspects.size(); ++a) out << (a ? ", " : "") << s.aspects[a];
            out << "]\n";
        }
    }
    out << "Query set\n";
    for (const auto& q : episode.query) {
        std::string classes;
        for (std::size_t n = 0; n < q.labels.size(); ++n)
            if (q.labels[n]) classes += std::string(classes.empty() ? "" : " and ") + "(" +
                                        static_cast<char>('A' + n % 26) + ")";
        out << "  " << classes << "  ";
        for (auto bit : q.labels) out << static_cast<int>(bit);
        out << "  " << corpus.sentence(q.sentence).text << '\n';
    }
}

}  // namespace slwla
