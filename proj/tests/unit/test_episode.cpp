#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "slwla/episode.hpp"
#include "slwla/error.hpp"
#include "slwla/synthetic.hpp"

using namespace slwla;

namespace {

std::size_t index_of(const Corpus& c, const std::string& id) {
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.sentence(i).id == id) return i;
    throw std::runtime_error("no sentence " + id);
}

}  // namespace

TEST_CASE("the restaurant meta-task is reachable and labelled as expected") {
    const auto corpus = fx::meta_task_corpus();
    EpisodeShape shape{3, 2, 1, 2};
    bool found = false;
    for (std::uint64_t seed = 0; seed < 5000 && !found; ++seed) {
        Rng rng(seed);
        const auto ep = sample_episode(corpus, Split::train, shape, rng);
        if (ep.aspects() != std::vector<AspectId>{"experience", "drinks", "food"}) continue;
        std::vector<std::string> support_ids, query_ids;
        for (const auto& cls : ep.support)
            for (auto i : cls.sentences) support_ids.push_back(corpus.sentence(i).id);
        for (const auto& q : ep.query) query_ids.push_back(corpus.sentence(q.sentence).id);
        std::sort(support_ids.begin(), support_ids.begin() + 2);
        std::sort(support_ids.begin() + 2, support_ids.begin() + 4);
        std::sort(support_ids.begin() + 4, support_ids.end());
        if (support_ids != std::vector<std::string>{"a1", "a2", "b1", "b2", "c1", "c2"}) continue;
        if (query_ids != std::vector<std::string>{"q1", "q2"}) continue;
        found = true;
        CHECK(ep.query[0].labels == std::vector<std::uint8_t>{1, 0, 1});
        CHECK(ep.query[1].labels == std::vector<std::uint8_t>{0, 1, 0});
        validate_episode(ep, corpus);

        std::ostringstream dump;
        print_episode(dump, ep, corpus);
        const auto text = dump.str();
        CHECK(text.find("3-way 2-shot") != std::string::npos);
        CHECK(text.find("(A) experience") != std::string::npos);
        CHECK(text.find("(C) food") != std::string::npos);
        CHECK(text.find("Query set") != std::string::npos);
        CHECK(text.find("101") != std::string::npos);
        CHECK(text.find("010") != std::string::npos);
    }
    CHECK(found);
}

TEST_CASE("N=1, K=1 minimal episode") {
    const auto corpus = fx::make_corpus({{"1", "x", {"a"}}, {"2", "y", {"a"}}}, {{"a", Split::train}});
    Rng rng(3);
    const auto ep = sample_episode(corpus, Split::train, {1, 1, 1, std::nullopt}, rng);
    REQUIRE(ep.support.size() == 1);
    REQUIRE(ep.query.size() == 1);
    CHECK(ep.query[0].labels == std::vector<std::uint8_t>{1});
    CHECK(ep.support[0].sentences[0] != ep.query[0].sentence);
}

TEST_CASE("sampled episode belongs to the brute-force enumeration") {
    // Six sentences over three aspects; N=2, K=1, two queries.
    const auto corpus = fx::make_corpus({{"s1", "a", {"x"}},
                                         {"s2", "b", {"x", "y"}},
                                         {"s3", "c", {"y"}},
                                         {"s4", "d", {"z"}},
                                         {"s5", "e", {"y", "z"}},
                                         {"s6", "f", {"x", "z"}}},
                                        {{"x", Split::train}, {"y", Split::train}, {"z", Split::train}});
    const std::vector<AspectId> aspects = {"x", "y", "z"};
    std::vector<Episode> all;
    for (const auto& a1 : aspects)
        for (const auto& a2 : aspects) {
            if (a1 == a2) continue;
            for (auto s1 : corpus.sentences_with(a1))
                for (auto s2 : corpus.sentences_with(a2)) {
                    if (s1 == s2) continue;
                    std::vector<std::size_t> pool;
                    for (std::size_t i = 0; i < corpus.size(); ++i)
                        if (i != s1 && i != s2 &&
                            (corpus.sentence(i).has_aspect(a1) || corpus.sentence(i).has_aspect(a2)))
                            pool.push_back(i);
                    for (auto q1 : pool)
                        for (auto q2 : pool) {
                            if (q1 == q2) continue;
                            Episode e;
                            e.way = 2;
                            e.shot = 1;
                            e.support = {{a1, {s1}}, {a2, {s2}}};
                            for (auto q : {q1, q2}) {
                                QueryItem item;
                                item.sentence = q;
                                item.labels = {static_cast<std::uint8_t>(corpus.sentence(q).has_aspect(a1)),
                                               static_cast<std::uint8_t>(corpus.sentence(q).has_aspect(a2))};
                                e.query.push_back(item);
                            }
                            all.push_back(e);
                        }
                }
        }
    REQUIRE(!all.empty());
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const auto ep = sample_episode(corpus, Split::train, {2, 1, 1, std::nullopt}, rng);
        CHECK(std::find(all.begin(), all.end(), ep) != all.end());
    }
}

TEST_CASE("episode invariants hold over random seeds") {
    SyntheticSpec spec;
    spec.aspects = 12;
    spec.sentences_per_aspect = 15;
    auto synth = make_synthetic_corpus(spec);
    const auto corpus = synth.corpus.with_catalog(split_aspects(synth.corpus.catalog(), {6, 3, 3}, 2));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const std::size_t way = 1 + seed % 5, shot = 1 + seed % 3;
        const auto ep = sample_episode(corpus, Split::train, {way, shot, 2, std::nullopt}, rng);
        CHECK_NOTHROW(validate_episode(ep, corpus));
        CHECK(ep.query.size() == 2 * way);
        const auto asp = ep.aspects();
        for (const auto& q : ep.query)
            for (std::size_t i = 0; i < way; ++i)
                CHECK(q.labels[i] == static_cast<std::uint8_t>(corpus.sentence(q.sentence).has_aspect(asp[i])));
    }
}

TEST_CASE("validate_episode rejects broken episodes") {
    const auto corpus = fx::meta_task_corpus();
    Episode e;
    e.way = 1;
    e.shot = 1;
    e.support = {{"food", {index_of(corpus, "c1")}}};
    e.query = {{index_of(corpus, "c1"), {1}}};
    CHECK_THROWS_AS(validate_episode(e, corpus), ValidationError);  // repeated sentence
    e.query = {{index_of(corpus, "c2"), {0}}};
    CHECK_THROWS_AS(validate_episode(e, corpus), ValidationError);  // wrong bit
    e.query = {{index_of(corpus, "c2"), {1}}};
    CHECK_NOTHROW(validate_episode(e, corpus));
    e.support = {{"food", {index_of(corpus, "a1")}}};
    CHECK_THROWS_AS(validate_episode(e, corpus), ValidationError);  // support lacks its aspect
}

TEST_CASE("sampling errors name the aspect") {
    const auto corpus = fx::make_corpus({{"1", "x", {"lonely"}}, {"2", "y", {"b"}}, {"3", "z", {"b"}}},
                                        {{"lonely", Split::train}});
    Rng rng(1);
    try {
        sample_episode(corpus, Split::train, {1, 2, 1, std::nullopt}, rng);
        FAIL("expected a sampling error");
    } catch (const SamplingError& e) {
        CHECK(std::string(e.what()).find("lonely") != std::string::npos);
    }
}

TEST_CASE("episode_stream counts and determinism") {
    SyntheticSpec spec;
    spec.aspects = 12;
    spec.sentences_per_aspect = 20;
    auto synth = make_synthetic_corpus(spec);
    const auto corpus = synth.corpus.with_catalog(split_aspects(synth.corpus.catalog(), {6, 3, 3}, 2));
    const EpisodeShape shape{3, 2, 2, std::nullopt};
    const auto a = episode_stream(corpus, Split::train, shape, 800, 9);
    CHECK(a.size() == 800);
    CHECK(episode_stream(corpus, Split::test, shape, 600, 9).size() == 600);
    CHECK(episode_stream(corpus, Split::train, shape, 800, 9) == a);
    CHECK(episode_stream(corpus, Split::train, shape, 800, 10) != a);
    CHECK_THROWS_AS(episode_stream(corpus, Split::train, shape, 0, 9), ConfigError);
}
