#pragma once

// Training-data construction from paired M / M* outputs, and the
// feedback -> correct loop run at inference time.
//
// Corpus-level entry points fan out over queries with OpenMP; the versions in
// `defgraph::serial` are the single-threaded references they are tested against.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defgraph/generators.hpp"
#include "defgraph/graph.hpp"
#include "defgraph/oracle.hpp"

namespace defgraph {

struct TrainingExample {
    DefeasibleQuery query;
    Feedback feedback;         // oracle output on bad_graph
    InfluenceGraph bad_graph;  // from M
    InfluenceGraph good_graph; // from M*, always oracle-clean
};

struct QueryFailure {
    std::string query_id;
    std::string reason;
};

struct TrainingData {
    std::vector<TrainingExample> examples;
    std::vector<QueryFailure> failures;
};

enum class PairDecision { KeepFlagged, KeepClean, Drop };

/// Retention rule for one (M, M*) pair of feedbacks.
PairDecision decide_pair(const Feedback& from_m, const Feedback& from_mstar) noexcept;

/// Corrector-side input of an example; the target side is encode(good_graph).
std::string training_input(const TrainingExample& example);

TrainingData build_training_data(std::span<const DefeasibleQuery> corpus, const GraphGenerator& gen_m,
                                 const GraphGenerator& gen_mstar, const OracleConfig& cfg);

enum class Termination { Clean, MaxItersExhausted, GeneratorError };

std::string_view termination_name(Termination t) noexcept;

struct RefinementStep {
    InfluenceGraph graph;
    Feedback feedback;
    InfluenceGraph corrected;
};

struct RefinementTrace {
    DefeasibleQuery query;
    std::optional<InfluenceGraph> initial;
    std::vector<RefinementStep> iterations;
    std::optional<InfluenceGraph> final_graph;
    Feedback final_feedback;
    Termination terminated = Termination::GeneratorError;
    std::string error;  // set when terminated == GeneratorError
};

inline constexpr int kDefaultMaxIters = 3;

/// Generate, then correct while the oracle flags the graph, at most `max_iters` times.
RefinementTrace refine(const DefeasibleQuery& query, const GraphGenerator& generator, const GraphGenerator& corrector,
                       const OracleConfig& cfg, int max_iters = kDefaultMaxIters);

std::vector<RefinementTrace> refine_corpus(std::span<const DefeasibleQuery> corpus, const GraphGenerator& generator,
                                           const GraphGenerator& corrector, const OracleConfig& cfg,
                                           int max_iters = kDefaultMaxIters);

namespace serial {

TrainingData build_training_data(std::span<const DefeasibleQuery> corpus, const GraphGenerator& gen_m,
                                 const GraphGenerator& gen_mstar, const OracleConfig& cfg);

std::vector<RefinementTrace> refine_corpus(std::span<const DefeasibleQuery> corpus, const GraphGenerator& generator,
                                           const GraphGenerator& corrector, const OracleConfig& cfg,
                                           int max_iters = kDefaultMaxIters);

}  // namespace serial

}  // namespace defgraph
