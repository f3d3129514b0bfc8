#include <doctest.h>

#include "defgraph/oracle.hpp"
#include "test_support.hpp"

using namespace defgraph;
using namespace defgraph::testing;

namespace {

const OracleConfig kDefault{};

OracleConfig with_threshold(double t) {
    OracleConfig cfg;
    cfg.overlap_threshold = t;
    return cfg;
}

std::vector<std::string> cues() {
    const auto set = default_negation_cues();
    return {set.begin(), set.end()};
}

}  // namespace

TEST_CASE("normalize_tokens") {
    using V = std::vector<std::string>;
    CHECK(normalize_tokens("Waves are bigger!", kDefault) == V{"waves", "bigger"});
    CHECK(normalize_tokens("no waves", kDefault) == V{"no", "waves"});
    CHECK(normalize_tokens("", kDefault).empty());
    CHECK(normalize_tokens("The sea, at night.", kDefault) == V{"sea", "night"});
    CHECK(normalize_tokens("It doesn't rain", kDefault) == V{"n't", "rain"});  // "does" is a stopword
    CHECK(normalize_tokens("Waves won't break", kDefault) == V{"waves", "n't", "break"});
    CHECK(normalize_tokens("can't stop", kDefault) == V{"n't", "stop"});  // "can" is a stopword
    CHECK(normalize_tokens("Café 水流", kDefault) == V{"café", "水流"});
}

TEST_CASE("overlap_score matches brute-force Jaccard") {
    using V = std::vector<std::string>;
    CHECK(overlap_score(V{"waves", "bigger"}, V{"waves", "bigger"}, kDefault) == doctest::Approx(1.0));
    CHECK(overlap_score(V{"waves", "bigger"}, V{"waves"}, kDefault) == doctest::Approx(0.5));
    CHECK(brute_jaccard({"waves", "bigger"}, {"waves"}) == doctest::Approx(0.5));
    CHECK(overlap_score(V{}, V{"waves"}, kDefault) == 0.0);
    CHECK(overlap_score(V{}, V{}, kDefault) == 0.0);
    CHECK(overlap_score(V{"no", "waves"}, V{"waves"}, kDefault) == doctest::Approx(1.0));

    std::mt19937_64 rng(11);
    const V vocab{"a", "b", "c", "d", "no", "not", "e"};
    for (int i = 0; i < 500; ++i) {
        V x, y;
        for (int k = static_cast<int>(rng() % 5); k > 0; --k) x.push_back(vocab[rng() % vocab.size()]);
        for (int k = static_cast<int>(rng() % 5); k > 0; --k) y.push_back(vocab[rng() % vocab.size()]);
        CHECK(overlap_score(x, y, kDefault) == doctest::Approx(brute_jaccard(x, y, cues())));
    }
}

TEST_CASE("is_repetition examples") {
    CHECK(is_repetition("waves are bigger", "waves are bigger", kDefault));

    // One side negated: the guard fires; the score (0.5) is below 0.8 as well.
    CHECK(brute_jaccard({"waves", "bigger"}, {"no", "waves"}, cues()) == doctest::Approx(0.5));
    CHECK_FALSE(is_repetition("waves are bigger", "no waves", kDefault));
    CHECK_FALSE(is_repetition("waves", "no waves", kDefault));

    // Both negated: compared on content {waves} vs {waves} ("at", "all" are stopwords).
    CHECK(brute_jaccard({"no", "waves"}, {"no", "waves"}, cues()) == doctest::Approx(1.0));
    CHECK(is_repetition("no waves", "no waves at all", with_threshold(0.5)));
    CHECK(is_repetition("no waves", "no waves at all", with_threshold(0.8)));

    CHECK_FALSE(is_repetition("it rains", "it doesn't rain", kDefault));
}

TEST_CASE("exact duplicates repeat at any threshold") {
    for (double t : {0.01, 0.5, 0.8, 0.99, 1.0}) {
        CHECK(is_repetition("waves are bigger", "waves   are bigger", with_threshold(t)));
        CHECK(is_repetition("the", "the", with_threshold(t)));  // all stopwords
        CHECK(is_repetition("no waves", "no waves", with_threshold(t)));
    }
}

TEST_CASE("property: symmetry, reflexivity, threshold monotonicity") {
    std::mt19937_64 rng(3);
    const std::vector<std::string> words{"waves", "big", "no", "rocks", "the", "shore", "not", "sand"};
    auto label = [&] {
        std::string s;
        for (int k = 1 + static_cast<int>(rng() % 4); k > 0; --k) s += words[rng() % words.size()] + " ";
        return s;
    };
    for (int i = 0; i < 2000; ++i) {
        const std::string a = label();
        const std::string b = label();
        const double hi = 0.05 + 0.95 * static_cast<double>(rng() % 1000) / 1000.0;
        const double lo = hi * static_cast<double>(rng() % 1000) / 1000.0 + 1e-6;
        const OracleConfig high = with_threshold(hi);
        const OracleConfig low = with_threshold(lo);
        CHECK(is_repetition(a, b, high) == is_repetition(b, a, high));
        CHECK(is_repetition(a, a, high));
        if (is_repetition(a, b, high)) CHECK(is_repetition(a, b, low));
    }
}

TEST_CASE("detect_clusters: two pairs") {
    const InfluenceGraph g = graph_of({"the man wears a hat", "the man wears a hat", "the man is outside",
                                       "the man is outside", "less shade", "more shade", "he is hot", "he is cold"});
    const auto clusters = detect_clusters(g, kDefault);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0] == RoleCluster{NodeRole::CMinus, NodeRole::CPlus});
    CHECK(clusters[1] == RoleCluster{NodeRole::S, NodeRole::SMinus});
    CHECK(render_feedback(clusters).rendered == "C-, C+ are overlapping, and S, S- are overlapping.");
}

TEST_CASE("detect_clusters: four- and three-role clusters") {
    const InfluenceGraph g = graph_of({"helping a friend", "helping a friend", "helping a friend", "helping a friend",
                                       "feeling good", "feeling good", "feeling good", "being selfish"});
    const auto clusters = detect_clusters(g, kDefault);
    CHECK(clusters == std::vector<RoleCluster>{{NodeRole::CMinus, NodeRole::CPlus, NodeRole::S, NodeRole::SMinus},
                                               {NodeRole::MMinus, NodeRole::MPlus, NodeRole::HPlus}});
    CHECK(run_oracle(g, kDefault).rendered ==
          "C-, C+, S, S- are overlapping, and M-, M+, H+ are overlapping.");
}

TEST_CASE("detect_clusters: distinct graph is clean") {
    CHECK(detect_clusters(distinct_graph(), kDefault).empty());
    const Feedback fb = run_oracle(distinct_graph(), kDefault);
    CHECK(fb.clean());
    CHECK(fb.rendered == "No issues, looks good.");
}

TEST_CASE("clusters are transitive components") {
    // a~b and b~c by overlap (2/3 >= 0.6) while a and c share only 1/3.
    const InfluenceGraph g = graph_of({"red blue", "red blue green", "blue green", "one", "two", "three", "four",
                                       "five"});
    const OracleConfig cfg = with_threshold(0.6);
    CHECK_FALSE(is_repetition("red blue", "blue green", cfg));
    CHECK(detect_clusters(g, cfg) == std::vector<RoleCluster>{{NodeRole::CMinus, NodeRole::CPlus, NodeRole::S}});
}

TEST_CASE("property: clusters equal brute-force closure, disjoint, no singletons") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
        const InfluenceGraph g = random_dup_graph(rng);
        const auto clusters = detect_clusters(g, kDefault);
        CHECK(clusters == brute_clusters(g, kDefault));
        std::set<NodeRole> seen;
        for (const auto& c : clusters) {
            CHECK(c.size() >= 2);
            CHECK(std::is_sorted(c.begin(), c.end()));
            for (NodeRole r : c) CHECK(seen.insert(r).second);
        }
        CHECK(run_oracle(g, kDefault) == run_oracle(g, kDefault));
    }
}

TEST_CASE("render_feedback templates") {
    CHECK(render_feedback({}).rendered == "No issues, looks good.");
    CHECK(render_feedback({{NodeRole::SMinus, NodeRole::MPlus}}).rendered == "S-, M+ are overlapping.");
    // Input order is canonicalized.
    CHECK(render_feedback({{NodeRole::SMinus, NodeRole::S}, {NodeRole::CPlus, NodeRole::CMinus}}).rendered ==
          "C-, C+ are overlapping, and S, S- are overlapping.");
    CHECK(render_feedback({{NodeRole::CMinus, NodeRole::SMinus},
                           {NodeRole::CPlus, NodeRole::HPlus},
                           {NodeRole::MMinus, NodeRole::MPlus}})
              .rendered ==
          "C-, S- are overlapping, and C+, H+ are overlapping, and M-, M+ are overlapping.");
}

TEST_CASE("oracle config validation") {
    CHECK_NOTHROW(kDefault.validate());
    CHECK_THROWS_AS(with_threshold(0.0).validate(), Error);
    CHECK_THROWS_AS(with_threshold(1.5).validate(), Error);
    OracleConfig bad;
    bad.stopwords.insert("no");
    CHECK_THROWS_AS(bad.validate(), Error);
    for (const auto& cue : default_negation_cues()) CHECK(default_stopwords().count(cue) == 0);
}
