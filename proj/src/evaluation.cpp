#include "defgraph/evaluation.hpp"

#include <cstdio>
#include <sstream>

#include "defgraph/generators.hpp"

namespace defgraph {

namespace {

RepetitionReport finish(Domain domain, std::size_t n, std::size_t redundant, std::size_t flagged) {
    RepetitionReport report;
    report.domain = domain;
    report.n_graphs = n;
    report.rep_per_graph = static_cast<double>(redundant) / static_cast<double>(n);
    report.pct_with_repetitions = 100.0 * static_cast<double>(flagged) / static_cast<double>(n);
    return report;
}

std::string fixed(double value, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string pad(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

}  // namespace

std::size_t repeated_node_count(const InfluenceGraph& graph, const OracleConfig& cfg) {
    std::size_t count = 0;
    for (const auto& cluster : detect_clusters(graph, cfg)) count += cluster.size() - 1;
    return count;
}

RepetitionReport repetition_report(std::span<const InfluenceGraph> graphs, const OracleConfig& cfg, Domain domain) {
    if (graphs.empty()) throw EmptyCorpusError();
    const auto n = static_cast<std::ptrdiff_t>(graphs.size());
    std::size_t redundant = 0;
    std::size_t flagged = 0;

#pragma omp parallel for reduction(+ : redundant, flagged) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t c = repeated_node_count(graphs[static_cast<std::size_t>(i)], cfg);
        redundant += c;
        flagged += c > 0 ? 1 : 0;
    }
    return finish(domain, graphs.size(), redundant, flagged);
}

namespace serial {

RepetitionReport repetition_report(std::span<const InfluenceGraph> graphs, const OracleConfig& cfg, Domain domain) {
    if (graphs.empty()) throw EmptyCorpusError();
    std::size_t redundant = 0;
    std::size_t flagged = 0;
    for (const auto& graph : graphs) {
        const std::size_t c = repeated_node_count(graph, cfg);
        redundant += c;
        if (c > 0) ++flagged;
    }
    return finish(domain, graphs.size(), redundant, flagged);
}

}  // namespace serial

ComparisonRow average_row(std::span<const ComparisonRow> rows) {
    ComparisonRow avg;
    avg.name = "average";
    if (rows.empty()) return avg;
    for (const auto& row : rows) {
        avg.before.n_graphs += row.before.n_graphs;
        avg.after.n_graphs += row.after.n_graphs;
        avg.before.rep_per_graph += row.before.rep_per_graph;
        avg.after.rep_per_graph += row.after.rep_per_graph;
        avg.before.pct_with_repetitions += row.before.pct_with_repetitions;
        avg.after.pct_with_repetitions += row.after.pct_with_repetitions;
    }
    const auto k = static_cast<double>(rows.size());
    avg.before.rep_per_graph /= k;
    avg.after.rep_per_graph /= k;
    avg.before.pct_with_repetitions /= k;
    avg.after.pct_with_repetitions /= k;
    return avg;
}

std::string render_comparison_table(std::span<const ComparisonRow> rows) {
    std::ostringstream out;
    out << pad("", 10) << pad("Metric (repetitions)", 22) << pad("no feedback (M)", 18) << "w/ feedback (G)\n";
    out << std::string(68, '-') << '\n';
    for (const auto& row : rows) {
        out << pad(row.name, 10) << pad("per graph", 22) << pad(fixed(row.before.rep_per_graph, 2), 18)
            << fixed(row.after.rep_per_graph, 2) << '\n';
        out << pad("", 10) << pad("% graphs", 22) << pad(fixed(row.before.pct_with_repetitions, 1), 18)
            << fixed(row.after.pct_with_repetitions, 1) << '\n';
        out << std::string(68, '-') << '\n';
    }
    return out.str();
}

std::optional<ClassifierMode> parse_classifier_mode(std::string_view text) noexcept {
    if (text == "baseline") return ClassifierMode::Baseline;
    if (text == "m" || text == "with-m") return ClassifierMode::WithM;
    if (text == "g" || text == "with-g") return ClassifierMode::WithG;
    return std::nullopt;
}

std::string classifier_input(const DefeasibleQuery& query, const InfluenceGraph* graph, ClassifierMode mode) {
    if (mode == ClassifierMode::Baseline) return format_generator_input(query, Variant::M);
    if (graph == nullptr) throw MissingGraphError();

    std::string out = query.premise;
    out += kFieldSeparator;
    out += query.hypothesis;
    out += kFieldSeparator;
    for (NodeRole role : kAllRoles) {
        if (role != NodeRole::CMinus) out += " | ";
        out += graph->label(role);
    }
    out += kFieldSeparator;
    out += query.update;
    return out;
}

}  // namespace defgraph
