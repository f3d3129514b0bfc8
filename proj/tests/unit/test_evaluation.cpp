#include <doctest.h>

#include "defgraph/evaluation.hpp"
#include "test_support.hpp"

using namespace defgraph;
using namespace defgraph::testing;

namespace {

const OracleConfig kDefault{};

std::vector<InfluenceGraph> random_corpus(std::mt19937_64& rng, std::size_t n) {
    std::vector<InfluenceGraph> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_dup_graph(rng));
    return out;
}

// Reference report computed directly from the brute-force cluster closure.
RepetitionReport brute_report(const std::vector<InfluenceGraph>& graphs) {
    double total = 0;
    double flagged = 0;
    for (const auto& g : graphs) {
        const auto n = brute_redundant(g, kDefault);
        total += static_cast<double>(n);
        if (n > 0) flagged += 1;
    }
    RepetitionReport r;
    r.n_graphs = graphs.size();
    r.rep_per_graph = total / static_cast<double>(graphs.size());
    r.pct_with_repetitions = 100.0 * flagged / static_cast<double>(graphs.size());
    return r;
}

}  // namespace

TEST_CASE("repeated node count") {
    CHECK(repeated_node_count(distinct_graph(), kDefault) == 0);
    CHECK(repeated_node_count(graph_of({"x", "x", "c", "d", "e", "f", "g", "h"}), kDefault) == 1);
    // A four-cluster and a three-cluster -> 3 + 2.
    CHECK(repeated_node_count(graph_of({"p", "p", "p", "p", "q", "q", "q", "r"}), kDefault) == 5);
    CHECK(repeated_node_count(graph_of({"z", "z", "z", "z", "z", "z", "z", "z"}), kDefault) == 7);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        const auto g = random_dup_graph(rng);
        CHECK(repeated_node_count(g, kDefault) == brute_redundant(g, kDefault));
    }
}

TEST_CASE("repetition report on a small corpus") {
    const std::vector<InfluenceGraph> graphs{distinct_graph(),
                                             graph_of({"p", "p", "p", "d", "e", "f", "g", "h"})};
    const auto r = repetition_report(graphs, kDefault, Domain::Snli);
    CHECK(r.domain == Domain::Snli);
    CHECK(r.n_graphs == 2);
    CHECK(r.rep_per_graph == doctest::Approx(1.0));
    CHECK(r.pct_with_repetitions == doctest::Approx(50.0));

    const std::vector<InfluenceGraph> clean(10, distinct_graph());
    const auto z = repetition_report(clean, kDefault, Domain::Atomic);
    CHECK(z.rep_per_graph == 0.0);
    CHECK(z.pct_with_repetitions == 0.0);

    CHECK_THROWS_AS(repetition_report(std::span<const InfluenceGraph>{}, kDefault, Domain::Atomic), EmptyCorpusError);
    CHECK_THROWS_AS(serial::repetition_report(std::span<const InfluenceGraph>{}, kDefault, Domain::Atomic),
                    EmptyCorpusError);
}

TEST_CASE("property: report matches brute force, is order-invariant, parallel == serial") {
    std::mt19937_64 rng(33);
    for (int round = 0; round < 20; ++round) {
        auto graphs = random_corpus(rng, 1 + rng() % 200);
        const auto par = repetition_report(graphs, kDefault, Domain::Social);
        const auto ser = serial::repetition_report(graphs, kDefault, Domain::Social);
        const auto ref = brute_report(graphs);
        CHECK(par.n_graphs == ref.n_graphs);
        CHECK(par.rep_per_graph == doctest::Approx(ref.rep_per_graph));
        CHECK(par.pct_with_repetitions == doctest::Approx(ref.pct_with_repetitions));
        CHECK(ser.rep_per_graph == doctest::Approx(par.rep_per_graph));
        CHECK(ser.pct_with_repetitions == doctest::Approx(par.pct_with_repetitions));

        std::shuffle(graphs.begin(), graphs.end(), rng);
        const auto shuffled = repetition_report(graphs, kDefault, Domain::Social);
        CHECK(shuffled.rep_per_graph == doctest::Approx(par.rep_per_graph));
        CHECK(shuffled.pct_with_repetitions == doctest::Approx(par.pct_with_repetitions));
    }
}

TEST_CASE("property: repair never increases the repeated node count") {
    std::mt19937_64 rng(44);
    for (int i = 0; i < 500; ++i) {
        const auto g = random_dup_graph(rng);
        const auto fixed = repair_correct(make_query(i), g, detect_clusters(g, kDefault), kDefault);
        CHECK(repeated_node_count(fixed, kDefault) <= repeated_node_count(g, kDefault));
        CHECK(repeated_node_count(fixed, kDefault) == 0);
    }
}

TEST_CASE("average row is the unweighted mean over domains") {
    auto make = [](const char* name, double before_rep, double before_pct, double after_rep, double after_pct,
                   std::size_t n) {
        ComparisonRow row;
        row.name = name;
        row.before = {Domain::Atomic, n, before_rep, before_pct};
        row.after = {Domain::Atomic, n, after_rep, after_pct};
        return row;
    };
    // Domain sizes differ on purpose: weighting by n would change the result.
    const std::vector<ComparisonRow> rows{make("atomic", 2.05, 72, 1.0, 40, 10),
                                          make("snli", 2.09, 73, 1.5, 50, 1000),
                                          make("social", 2.2, 75, 1.25, 52.8, 3)};
    const ComparisonRow avg = average_row(rows);
    CHECK(avg.name == "average");
    CHECK(avg.before.rep_per_graph == doctest::Approx(2.11333).epsilon(1e-4));
    CHECK(avg.before.pct_with_repetitions == doctest::Approx(73.3333).epsilon(1e-4));
    CHECK(avg.after.rep_per_graph == doctest::Approx(1.25));
    CHECK(avg.after.pct_with_repetitions == doctest::Approx(47.6));

    std::vector<ComparisonRow> with_avg = rows;
    with_avg.push_back(avg);
    const std::string table = render_comparison_table(with_avg);
    CHECK(table.find("per graph") != std::string::npos);
    CHECK(table.find("% graphs") != std::string::npos);
    CHECK(table.find("atomic") != std::string::npos);
    CHECK(table.find("average") != std::string::npos);
    CHECK(table.find("2.11") != std::string::npos);
    CHECK(table.find("73.3") != std::string::npos);
}

TEST_CASE("classifier inputs") {
    const DefeasibleQuery q = make_query(0);
    const InfluenceGraph g = graph_of({"a", "b", "c", "d", "e", "f", "g", "h"});
    CHECK(classifier_input(q, nullptr, ClassifierMode::Baseline) == q.premise + " || " + q.hypothesis + " || " + q.update);
    CHECK(classifier_input(q, &g, ClassifierMode::Baseline) == q.premise + " || " + q.hypothesis + " || " + q.update);
    CHECK(classifier_input(q, &g, ClassifierMode::WithG) ==
          q.premise + " || " + q.hypothesis + " || a | b | c | d | e | f | g | h || " + q.update);
    CHECK(classifier_input(q, &g, ClassifierMode::WithM) == classifier_input(q, &g, ClassifierMode::WithG));
    CHECK_THROWS_AS(classifier_input(q, nullptr, ClassifierMode::WithM), MissingGraphError);

    CHECK(parse_classifier_mode("baseline") == ClassifierMode::Baseline);
    CHECK(parse_classifier_mode("with-g") == ClassifierMode::WithG);
    CHECK(parse_classifier_mode("m") == ClassifierMode::WithM);
    CHECK_FALSE(parse_classifier_mode("graph").has_value());
}
