#include "defgraph/pipeline.hpp"

#include <stdexcept>
#include <variant>

namespace defgraph {

namespace {

// Outcome of pairing one query: an example, nothing (dropped), or a failure.
using PairOutcome = std::variant<std::monostate, TrainingExample, QueryFailure>;

PairOutcome pair_query(const DefeasibleQuery& query, const GraphGenerator& gen_m, const GraphGenerator& gen_mstar,
                       const OracleConfig& cfg) {
    try {
        GenerationResult from_m = gen_m.generate(query, Variant::M);
        GenerationResult from_mstar = gen_mstar.generate(query, Variant::MStar);
        Feedback fb_m = run_oracle(from_m.graph, cfg);
        Feedback fb_mstar = run_oracle(from_mstar.graph, cfg);
        if (decide_pair(fb_m, fb_mstar) == PairDecision::Drop) return std::monostate{};
        return TrainingExample{query, std::move(fb_m), std::move(from_m.graph), std::move(from_mstar.graph)};
    } catch (const std::exception& e) {
        return QueryFailure{query.id, e.what()};
    }
}

void merge(TrainingData& out, PairOutcome&& outcome) {
    if (auto* ex = std::get_if<TrainingExample>(&outcome)) {
        out.examples.push_back(std::move(*ex));
    } else if (auto* fail = std::get_if<QueryFailure>(&outcome)) {
        out.failures.push_back(std::move(*fail));
    }
}

}  // namespace

PairDecision decide_pair(const Feedback& from_m, const Feedback& from_mstar) noexcept {
    if (!from_mstar.clean()) return PairDecision::Drop;
    return from_m.clean() ? PairDecision::KeepClean : PairDecision::KeepFlagged;
}

std::string training_input(const TrainingExample& example) {
    return format_training_input(example.query, example.feedback.rendered, example.bad_graph);
}

std::string_view termination_name(Termination t) noexcept {
    switch (t) {
        case Termination::Clean: return "Clean";
        case Termination::MaxItersExhausted: return "MaxItersExhausted";
        case Termination::GeneratorError: return "GeneratorError";
    }
    return "GeneratorError";
}

RefinementTrace refine(const DefeasibleQuery& query, const GraphGenerator& generator, const GraphGenerator& corrector,
                       const OracleConfig& cfg, int max_iters) {
    if (max_iters < 1) throw Error("max_iters must be >= 1");

    RefinementTrace trace;
    trace.query = query;
    try {
        trace.initial = generator.generate(query, Variant::M).graph;
    } catch (const std::exception& e) {
        trace.error = e.what();
        return trace;
    }

    InfluenceGraph current = *trace.initial;
    Feedback fb = run_oracle(current, cfg);
    while (!fb.clean() && static_cast<int>(trace.iterations.size()) < max_iters) {
        try {
            InfluenceGraph corrected = corrector.correct(query, current, fb.rendered).graph;
            trace.iterations.push_back({current, std::move(fb), corrected});
            current = std::move(corrected);
        } catch (const std::exception& e) {
            trace.final_graph = current;
            trace.final_feedback = std::move(fb);
            trace.error = e.what();
            return trace;
        }
        fb = run_oracle(current, cfg);
    }

    trace.final_graph = std::move(current);
    trace.terminated = fb.clean() ? Termination::Clean : Termination::MaxItersExhausted;
    trace.final_feedback = std::move(fb);
    return trace;
}

TrainingData build_training_data(std::span<const DefeasibleQuery> corpus, const GraphGenerator& gen_m,
                                 const GraphGenerator& gen_mstar, const OracleConfig& cfg) {
    const auto n = static_cast<std::ptrdiff_t>(corpus.size());
    std::vector<PairOutcome> outcomes(corpus.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        outcomes[static_cast<std::size_t>(i)] = pair_query(corpus[static_cast<std::size_t>(i)], gen_m, gen_mstar, cfg);
    }

    TrainingData out;
    for (auto& outcome : outcomes) merge(out, std::move(outcome));
    return out;
}

std::vector<RefinementTrace> refine_corpus(std::span<const DefeasibleQuery> corpus, const GraphGenerator& generator,
                                           const GraphGenerator& corrector, const OracleConfig& cfg, int max_iters) {
    if (max_iters < 1) throw Error("max_iters must be >= 1");
    const auto n = static_cast<std::ptrdiff_t>(corpus.size());
    std::vector<RefinementTrace> traces(corpus.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        traces[idx] = refine(corpus[idx], generator, corrector, cfg, max_iters);
    }
    return traces;
}

namespace serial {

TrainingData build_training_data(std::span<const DefeasibleQuery> corpus, const GraphGenerator& gen_m,
                                 const GraphGenerator& gen_mstar, const OracleConfig& cfg) {
    TrainingData out;
    for (const auto& query : corpus) merge(out, pair_query(query, gen_m, gen_mstar, cfg));
    return out;
}

std::vector<RefinementTrace> refine_corpus(std::span<const DefeasibleQuery> corpus, const GraphGenerator& generator,
                                           const GraphGenerator& corrector, const OracleConfig& cfg, int max_iters) {
    std::vector<RefinementTrace> traces;
    traces.reserve(corpus.size());
    for (const auto& query : corpus) traces.push_back(refine(query, generator, corrector, cfg, max_iters));
    return traces;
}

}  // namespace serial

}  // namespace defgraph
