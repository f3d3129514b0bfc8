#include "defgraph/records.hpp"

#include "defgraph/codec.hpp"

namespace defgraph {

namespace {

std::string required_text(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw SchemaError(std::string("missing string field \"") + key + "\"");
    return j[key].get<std::string>();
}

json cluster_json(const RoleCluster& cluster) {
    json out = json::array();
    for (NodeRole role : cluster) out.push_back(std::string(role_name(role)));
    return out;
}

}  // namespace

json to_json(const DefeasibleQuery& q) {
    return {{"id", q.id},
            {"premise", q.premise},
            {"hypothesis", q.hypothesis},
            {"update", q.update},
            {"label", q.label ? json(std::string(label_name(*q.label))) : json(nullptr)},
            {"domain", std::string(domain_name(q.domain))}};
}

DefeasibleQuery query_from_json(const json& j, std::optional<Domain> domain) {
    if (!j.is_object()) throw SchemaError("query record is not an object");
    DefeasibleQuery q;
    if (j.contains("id")) {
        if (j["id"].is_string()) {
            q.id = j["id"].get<std::string>();
        } else if (j["id"].is_number_integer()) {
            q.id = std::to_string(j["id"].get<long long>());
        } else if (!j["id"].is_null()) {
            throw SchemaError("field \"id\" must be a string or integer");
        }
    }
    q.premise = required_text(j, "premise");
    q.hypothesis = required_text(j, "hypothesis");
    q.update = required_text(j, "update");
    if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_string()) throw SchemaError("field \"label\" must be a string");
        q.label = parse_label(j["label"].get<std::string>());
        if (!q.label) throw SchemaError("unknown label \"" + j["label"].get<std::string>() + "\"");
    }
    if (j.contains("domain") && !j["domain"].is_null()) {
        if (!j["domain"].is_string()) throw SchemaError("field \"domain\" must be a string");
        auto d = parse_domain(j["domain"].get<std::string>());
        if (!d) throw SchemaError("unknown domain \"" + j["domain"].get<std::string>() + "\"");
        q.domain = *d;
    } else if (domain) {
        q.domain = *domain;
    }
    try {
        validate(q);
    } catch (const InvalidQuery& e) {
        throw SchemaError(e.what());
    }
    return q;
}

json nodes_to_json(const InfluenceGraph& graph) {
    json out = json::object();
    for (NodeRole role : kAllRoles) out[std::string(role_name(role))] = graph.label(role);
    return out;
}

InfluenceGraph graph_from_json(const json& j) {
    if (j.is_string()) {
        ParseReport report = decode(j.get<std::string>());
        if (!report.graph) throw SchemaError("graph string does not decode to a complete graph");
        return *report.graph;
    }
    if (!j.is_object()) throw SchemaError("graph must be an encoded string or a role -> label object");
    std::map<NodeRole, std::string> labels;
    for (const auto& [key, value] : j.items()) {
        auto role = parse_role(key);
        if (!role) throw SchemaError("unknown role \"" + key + "\"");
        if (!value.is_string()) throw SchemaError("label for role " + key + " must be a string");
        labels[*role] = value.get<std::string>();
    }
    try {
        return InfluenceGraph::create(labels);
    } catch (const GraphError& e) {
        throw SchemaError(e.what());
    }
}

json to_json(const Feedback& fb) {
    json clusters = json::array();
    for (const auto& c : fb.clusters) clusters.push_back(cluster_json(c));
    return {{"clusters", clusters}, {"rendered", fb.rendered}};
}

Feedback feedback_from_json(const json& j) {
    if (!j.is_object() || !j.contains("clusters") || !j["clusters"].is_array()) {
        throw SchemaError("feedback must carry a \"clusters\" array");
    }
    std::vector<RoleCluster> clusters;
    for (const auto& c : j["clusters"]) {
        RoleCluster cluster;
        for (const auto& r : c) {
            auto role = r.is_string() ? parse_role(r.get<std::string>()) : std::nullopt;
            if (!role) throw SchemaError("bad role in feedback cluster");
            cluster.push_back(*role);
        }
        clusters.push_back(std::move(cluster));
    }
    return render_feedback(std::move(clusters));
}

json to_json(const RefinementTrace& trace) {
    json iterations = json::array();
    for (const auto& step : trace.iterations) {
        iterations.push_back({{"graph", encode(step.graph)},
                              {"feedback", to_json(step.feedback)},
                              {"corrected", encode(step.corrected)}});
    }
    json out = {{"query_id", trace.query.id},
                {"domain", std::string(domain_name(trace.query.domain))},
                {"initial", trace.initial ? json(encode(*trace.initial)) : json(nullptr)},
                {"iterations", iterations},
                {"final", trace.final_graph ? json(encode(*trace.final_graph)) : json(nullptr)},
                {"final_feedback", to_json(trace.final_feedback)},
                {"terminated", std::string(termination_name(trace.terminated))}};
    if (!trace.error.empty()) out["error"] = trace.error;
    return out;
}

json training_record(const TrainingExample& ex) {
    return {{"input", training_input(ex)},
            {"target", encode(ex.good_graph)},
            {"meta",
             {{"query_id", ex.query.id},
              {"domain", std::string(domain_name(ex.query.domain))},
              {"feedback", to_json(ex.feedback)},
              {"bad_graph", encode(ex.bad_graph)},
              {"kind", ex.feedback.clean() ? "clean" : "flagged"}}}};
}

json to_json(const RepetitionReport& r) {
    return {{"domain", std::string(domain_name(r.domain))},
            {"n_graphs", r.n_graphs},
            {"rep_per_graph", r.rep_per_graph},
            {"pct_with_repetitions", r.pct_with_repetitions}};
}

json classifier_record(const DefeasibleQuery& query, const InfluenceGraph* graph, ClassifierMode mode) {
    return {{"text", classifier_input(query, graph, mode)},
            {"label", query.label ? json(std::string(label_name(*query.label))) : json(nullptr)}};
}

}  // namespace defgraph
