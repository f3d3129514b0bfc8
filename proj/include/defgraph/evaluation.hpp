#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defgraph/graph.hpp"
#include "defgraph/oracle.hpp"

namespace defgraph {

/// Redundant nodes: sum over clusters of (size - 1).
std::size_t repeated_node_count(const InfluenceGraph& graph, const OracleConfig& cfg);

struct RepetitionReport {
    Domain domain = Domain::Atomic;
    std::size_t n_graphs = 0;
    double rep_per_graph = 0.0;
    double pct_with_repetitions = 0.0;
};

class EmptyCorpusError : public Error {
public:
    EmptyCorpusError() : Error("cannot report on an empty corpus") {}
};

/// OpenMP reduction over the corpus. Throws EmptyCorpusError.
RepetitionReport repetition_report(std::span<const InfluenceGraph> graphs, const OracleConfig& cfg, Domain domain);

namespace serial {
RepetitionReport repetition_report(std::span<const InfluenceGraph> graphs, const OracleConfig& cfg, Domain domain);
}

/// One row pair of the before/after table.
struct ComparisonRow {
    std::string name;  // domain name or "average"
    RepetitionReport before;
    RepetitionReport after;
};

/// Unweighted mean of per-domain values, the way the summary row is averaged.
ComparisonRow average_row(std::span<const ComparisonRow> rows);

/// Plain-text table: per graph / % graphs rows, no feedback (M) vs w/ feedback (G).
std::string render_comparison_table(std::span<const ComparisonRow> rows);

enum class ClassifierMode { Baseline, WithM, WithG };

std::optional<ClassifierMode> parse_classifier_mode(std::string_view text) noexcept;

class MissingGraphError : public Error {
public:
    MissingGraphError() : Error("classifier input with graph mode requires a graph") {}
};

/// Baseline: "P || H || S". WithM / WithG: "P || H || <8 labels joined by ' | '> || S".
std::string classifier_input(const DefeasibleQuery& query, const InfluenceGraph* graph, ClassifierMode mode);

}  // namespace defgraph
