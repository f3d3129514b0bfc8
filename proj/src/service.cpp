#include "defgraph/service.hpp"

#include <functional>
#include <map>

#include <httplib.h>

#include "defgraph/codec.hpp"
#include "defgraph/evaluation.hpp"
#include "defgraph/pipeline.hpp"
#include "defgraph/records.hpp"

namespace defgraph {

namespace {

struct HttpError {
    int status;
    json body;
};

HttpError bad_request(const std::string& message) { return {400, {{"error", message}}}; }

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw bad_request("request body must be a JSON object");
    return body;
}

std::string require_string(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string()) {
        throw bad_request(std::string("missing string field \"") + key + "\"");
    }
    return body[key].get<std::string>();
}

GraphFilter filter_from(const httplib::Request& req) {
    GraphFilter filter;
    if (req.has_param("source")) {
        filter.source = parse_source(req.get_param_value("source"));
        if (!filter.source) throw bad_request("unknown source '" + req.get_param_value("source") + "'");
    }
    if (req.has_param("domain")) {
        filter.domain = parse_domain(req.get_param_value("domain"));
        if (!filter.domain) throw bad_request("unknown domain '" + req.get_param_value("domain") + "'");
    }
    if (req.has_param("query_id")) filter.query_id = req.get_param_value("query_id");
    if (req.has_param("flagged")) filter.flagged = req.get_param_value("flagged") == "true";
    return filter;
}

using Handler = std::function<json(const httplib::Request&)>;

httplib::Server::Handler wrap(Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
        int status = 200;
        json body;
        try {
            body = handler(req);
        } catch (const HttpError& e) {
            status = e.status;
            body = e.body;
        } catch (const NotFoundError& e) {
            status = 404;
            body = {{"error", e.what()}};
        } catch (const EmptyCorpusError& e) {
            status = 404;
            body = {{"error", e.what()}};
        } catch (const TransportError& e) {
            status = 502;
            body = {{"error", e.what()}};
        } catch (const UnparseableError& e) {
            status = 502;
            body = {{"error", e.what()}};
        } catch (const IoError& e) {
            status = 500;
            body = {{"error", e.what()}};
        } catch (const Error& e) {
            status = 400;
            body = {{"error", e.what()}};
        } catch (const json::exception& e) {
            status = 400;
            body = {{"error", e.what()}};
        } catch (const std::exception& e) {
            status = 500;
            body = {{"error", e.what()}};
        }
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
}

const GraphGenerator& need(const std::shared_ptr<const GraphGenerator>& gen, const char* what) {
    if (!gen) throw HttpError{400, {{"error", std::string(what) + " is not configured"}}};
    return *gen;
}

}  // namespace

json metrics_json(const Store& store, const GraphFilter& filter, const OracleConfig& cfg) {
    const auto records = store.list(filter);
    if (records.empty()) throw EmptyCorpusError();

    std::vector<InfluenceGraph> all;
    std::map<Domain, std::vector<InfluenceGraph>> by_domain;
    for (const auto& r : records) {
        all.push_back(r.graph);
        const auto q = store.find_query(r.query_id);
        by_domain[q ? q->domain : Domain::Atomic].push_back(r.graph);
    }

    const RepetitionReport overall = repetition_report(all, cfg, filter.domain.value_or(Domain::Atomic));
    json out = {{"n_graphs", overall.n_graphs},
                {"rep_per_graph", overall.rep_per_graph},
                {"pct_with_repetitions", overall.pct_with_repetitions},
                {"source", filter.source ? json(std::string(source_name(*filter.source))) : json(nullptr)},
                {"domain", filter.domain ? json(std::string(domain_name(*filter.domain))) : json("all")}};
    json domains = json::array();
    for (const auto& [domain, graphs] : by_domain) domains.push_back(to_json(repetition_report(graphs, cfg, domain)));
    out["by_domain"] = domains;
    return out;
}

Service::Service(Store& store, ServiceDeps deps)
    : store_(store), deps_(std::move(deps)), server_(std::make_unique<httplib::Server>()) {
    deps_.oracle.validate();
    install_routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    if (!server_->bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void Service::run() { server_->listen_after_bind(); }

void Service::stop() {
    if (server_) server_->stop();
}

void Service::install_routes() {
    auto& srv = *server_;

    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Get("/queries", wrap([this](const httplib::Request&) {
                json out = json::array();
                for (const auto& q : store_.queries()) out.push_back(to_json(q));
                return out;
            }));

    srv.Get("/graphs", wrap([this](const httplib::Request& req) {
                json out = json::array();
                for (const auto& r : store_.list(filter_from(req))) out.push_back(to_json(r));
                return out;
            }));

    srv.Get(R"(/graphs/([^/]+))", wrap([this](const httplib::Request& req) {
                return to_json(store_.get(req.matches[1].str()));
            }));

    srv.Get("/edge-template", wrap([](const httplib::Request&) {
                json out = json::array();
                for (const Edge& e : edge_template()) {
                    out.push_back({{"source", std::string(role_name(e.source))},
                                   {"target", std::string(role_name(e.target))},
                                   {"polarity", std::string(polarity_name(e.polarity))}});
                }
                return out;
            }));

    srv.Post("/generate", wrap([this](const httplib::Request& req) {
                 const json body = parse_body(req);
                 const DefeasibleQuery q = store_.get_query(require_string(body, "query_id"));
                 Variant variant = Variant::M;
                 if (body.contains("variant")) {
                     auto v = body["variant"].is_string() ? parse_variant(body["variant"].get<std::string>())
                                                          : std::nullopt;
                     if (!v) throw bad_request("variant must be \"m\" or \"mstar\"");
                     variant = *v;
                 }
                 const GraphGenerator& gen =
                     variant == Variant::M ? need(deps_.gen_m, "generator m") : need(deps_.gen_mstar, "generator mstar");
                 GenerationResult result = gen.generate(q, variant);
                 Feedback fb = run_oracle(result.graph, deps_.oracle);
                 const auto source = variant == Variant::M ? GraphSource::GeneratorM : GraphSource::GeneratorMStar;
                 return to_json(store_.add_graph(q.id, source, std::move(result.graph), std::move(fb)));
             }));

    srv.Post("/feedback", wrap([this](const httplib::Request& req) {
                 const json body = parse_body(req);
                 const StoredGraph record = store_.get(require_string(body, "graph_id"));
                 json out = to_json(run_oracle(record.graph, deps_.oracle));
                 out["graph_id"] = record.id;
                 return out;
             }));

    srv.Post("/correct", wrap([this](const httplib::Request& req) {
                 const json body = parse_body(req);
                 const StoredGraph record = store_.get(require_string(body, "graph_id"));
                 const DefeasibleQuery q = store_.get_query(record.query_id);
                 std::string feedback_text = body.contains("feedback_text")
                                                 ? require_string(body, "feedback_text")
                                                 : run_oracle(record.graph, deps_.oracle).rendered;
                 if (feedback_text.empty()) throw bad_request("feedback_text must not be empty");

                 GenerationResult result = need(deps_.corrector, "corrector").correct(q, record.graph, feedback_text);
                 Feedback fb = run_oracle(result.graph, deps_.oracle);
                 json out = to_json(
                     store_.add_graph(q.id, GraphSource::Corrector, std::move(result.graph), std::move(fb), record.id));
                 out["feedback_text"] = feedback_text;
                 return out;
             }));

    srv.Post("/refine", wrap([this](const httplib::Request& req) {
                 const json body = parse_body(req);
                 const DefeasibleQuery q = store_.get_query(require_string(body, "query_id"));
                 int max_iters = deps_.default_max_iters;
                 if (body.contains("max_iters")) {
                     if (!body["max_iters"].is_number_integer()) throw bad_request("max_iters must be an integer");
                     max_iters = body["max_iters"].get<int>();
                 }
                 if (max_iters < 1) throw bad_request("max_iters must be >= 1");

                 RefinementTrace trace = refine(q, need(deps_.gen_m, "generator m"), need(deps_.corrector, "corrector"),
                                                deps_.oracle, max_iters);
                 json out = to_json(trace);
                 if (trace.terminated == Termination::GeneratorError) {
                     throw HttpError{502, {{"error", trace.error}, {"trace", out}}};
                 }

                 std::vector<Store::NewGraph> chain;
                 chain.push_back({GraphSource::GeneratorM, *trace.initial, run_oracle(*trace.initial, deps_.oracle)});
                 for (const auto& step : trace.iterations) {
                     chain.push_back({GraphSource::Corrector, step.corrected, run_oracle(step.corrected, deps_.oracle)});
                 }
                 json ids = json::array();
                 for (const auto& r : store_.add_graph_chain(q.id, std::move(chain))) ids.push_back(r.id);
                 out["graph_ids"] = ids;
                 return out;
             }));

    srv.Post("/review", wrap([this](const httplib::Request& req) {
                 const json body = parse_body(req);
                 const std::string graph_id = require_string(body, "graph_id");
                 if (!body.contains("accepted") || !body["accepted"].is_boolean()) {
                     throw bad_request("missing boolean field \"accepted\"");
                 }
                 Review review{body.value("human_feedback", std::string{}), body["accepted"].get<bool>()};
                 auto outcome = store_.review(graph_id, std::move(review));
                 json out = {{"reviewed", to_json(outcome.reviewed)}, {"accepted", nullptr}};
                 if (outcome.accepted) out["accepted"] = to_json(*outcome.accepted);
                 return out;
             }));

    srv.Get("/metrics", wrap([this](const httplib::Request& req) {
                return metrics_json(store_, filter_from(req), deps_.oracle);
            }));
}

}  // namespace defgraph
