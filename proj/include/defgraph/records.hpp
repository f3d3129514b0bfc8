#pragma once

// JSON forms of the domain types, shared by the store, the HTTP API and the
// line-delimited files the CLI reads and writes.

#include <optional>

#include <json.hpp>

#include "defgraph/evaluation.hpp"
#include "defgraph/graph.hpp"
#include "defgraph/oracle.hpp"
#include "defgraph/pipeline.hpp"

namespace defgraph {

using json = nlohmann::json;

class SchemaError : public Error {
public:
    using Error::Error;
};

/// {"id","premise","hypothesis","update","label","domain"}; label may be null.
json to_json(const DefeasibleQuery& query);
/// Missing "domain" falls back to `domain`; missing "id" is left empty.
DefeasibleQuery query_from_json(const json& j, std::optional<Domain> domain = std::nullopt);

/// {"C-": "...", ..., "H-": "..."}
json nodes_to_json(const InfluenceGraph& graph);
/// Accepts an encoded string or a role -> label object.
InfluenceGraph graph_from_json(const json& j);

json to_json(const Feedback& feedback);
Feedback feedback_from_json(const json& j);

json to_json(const RefinementTrace& trace);

/// {"input": <corrector input>, "target": encode(good), "meta": {...}}
json training_record(const TrainingExample& example);

json to_json(const RepetitionReport& report);

/// {"text": classifier_input(...), "label": "strengthener"|"weakener"|null}
json classifier_record(const DefeasibleQuery& query, const InfluenceGraph* graph, ClassifierMode mode);

}  // namespace defgraph
