// defgraph: command-line front end for the workbench.

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "defgraph/codec.hpp"
#include "defgraph/config.hpp"
#include "defgraph/evaluation.hpp"
#include "defgraph/pipeline.hpp"
#include "defgraph/records.hpp"
#include "defgraph/service.hpp"
#include "defgraph/store.hpp"

using namespace defgraph;

namespace {

struct Globals {
    std::string config_path;
    std::optional<double> threshold;
    std::string m_endpoint;
    std::string mstar_endpoint;
    std::string corrector_endpoint;
    std::optional<int> max_iters;
    std::string store_dir;
};

WorkbenchConfig resolve(const Globals& g) {
    WorkbenchConfig cfg = g.config_path.empty() ? WorkbenchConfig{} : load_config(g.config_path);
    apply_env_overrides(cfg);
    if (g.threshold) cfg.oracle.overlap_threshold = *g.threshold;
    auto remote = [](GeneratorSpec& spec, const std::string& endpoint) {
        if (endpoint.empty()) return;
        spec.kind = GeneratorKind::Remote;
        spec.endpoint = endpoint;
    };
    remote(cfg.gen_m, g.m_endpoint);
    remote(cfg.gen_mstar, g.mstar_endpoint);
    remote(cfg.corrector, g.corrector_endpoint);
    if (g.max_iters) cfg.max_iters = *g.max_iters;
    if (!g.store_dir.empty()) cfg.store_dir = g.store_dir;
    cfg.validate();
    return cfg;
}

/// Writes to a file, or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw IoError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
    void line(const json& j) { stream() << j.dump() << '\n'; }

private:
    std::ofstream file_;
};

std::vector<DefeasibleQuery> select_queries(const Store& store, const std::vector<std::string>& ids) {
    if (ids.empty()) return store.queries();
    std::vector<DefeasibleQuery> out;
    for (const auto& id : ids) out.push_back(store.get_query(id));
    return out;
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::vector<json> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw SchemaError(path + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

Domain domain_arg(const std::string& text) {
    auto d = parse_domain(text);
    if (!d) throw Error("unknown domain '" + text + "'");
    return *d;
}

using DomainGraphs = std::map<Domain, std::vector<InfluenceGraph>>;

DomainGraphs graphs_from_file(const std::string& path) {
    DomainGraphs out;
    std::size_t number = 0;
    for (const json& j : read_jsonl(path)) {
        ++number;
        if (!j.is_object() || !j.contains("graph")) {
            throw SchemaError(path + ": record " + std::to_string(number) + " has no \"graph\"");
        }
        Domain domain = Domain::Atomic;
        if (j.contains("domain")) {
            auto d = parse_domain(j["domain"].get<std::string>());
            if (!d) throw SchemaError(path + ": record " + std::to_string(number) + ": unknown domain");
            domain = *d;
        }
        out[domain].push_back(graph_from_json(j["graph"]));
    }
    return out;
}

// Initial and final graphs of each completed refine trace.
std::pair<DomainGraphs, DomainGraphs> graphs_from_traces(const std::string& path) {
    DomainGraphs before, after;
    for (const json& j : read_jsonl(path)) {
        if (j.value("terminated", "") == "GeneratorError") continue;
        const Domain domain = domain_arg(j.value("domain", "atomic"));
        before[domain].push_back(graph_from_json(j.at("initial")));
        after[domain].push_back(graph_from_json(j.at("final")));
    }
    return {before, after};
}

// Corrector outputs that no later correction refined further.
bool is_leaf(const StoredGraph& r, const std::set<std::string>& parents) { return parents.count(r.id) == 0; }

DomainGraphs graphs_from_store(const Store& store, GraphSource source) {
    std::set<std::string> parents;
    for (const auto& r : store.list({.source = GraphSource::Corrector})) parents.insert(r.parent_id);
    DomainGraphs out;
    for (const auto& r : store.list({.source = source})) {
        if (source == GraphSource::Corrector && !is_leaf(r, parents)) continue;
        const auto q = store.find_query(r.query_id);
        out[q ? q->domain : Domain::Atomic].push_back(r.graph);
    }
    return out;
}

GraphSource source_arg(const std::string& text) {
    auto s = parse_source(text);
    if (!s) throw Error("unknown source '" + text + "'");
    return *s;
}

Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Influence-graph workbench: generate, critique, correct and evaluate graphs"};
    app.require_subcommand(1);

    Globals globals;
    app.add_option("--config", globals.config_path, "Settings file (key = value lines)")->check(CLI::ExistingFile);
    app.add_option("--threshold", globals.threshold, "Oracle overlap threshold in (0, 1]");
    app.add_option("--m-endpoint", globals.m_endpoint, "Remote endpoint for the M generator");
    app.add_option("--mstar-endpoint", globals.mstar_endpoint, "Remote endpoint for the M* generator");
    app.add_option("--corrector-endpoint", globals.corrector_endpoint, "Remote endpoint for the corrector");
    app.add_option("--max-iters", globals.max_iters, "Correction budget per query");
    app.add_option("--store", globals.store_dir, "Store directory");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load queries from JSONL or CSV into the store");
    std::string ingest_file, ingest_format = "jsonl", ingest_domain = "atomic";
    ingest->add_option("file", ingest_file, "Input file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--format", ingest_format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
    ingest->add_option("--domain", ingest_domain, "Domain for records without one");

    // generate
    auto* generate = app.add_subcommand("generate", "Generate graphs for stored queries and record them");
    std::string gen_variant = "m", gen_out;
    std::vector<std::string> gen_ids;
    generate->add_option("--variant", gen_variant, "m or mstar")->check(CLI::IsMember({"m", "mstar"}));
    generate->add_option("--query-id", gen_ids, "Restrict to these query ids");
    generate->add_option("--out", gen_out, "Write stored records as JSONL here (default stdout)");

    // feedback
    auto* feedback = app.add_subcommand("feedback", "Run the repetition oracle");
    std::string fb_graph, fb_graphs, fb_out;
    feedback->add_option("--graph", fb_graph, "One encoded graph");
    feedback->add_option("--graphs", fb_graphs, "JSONL file with a \"graph\" field per line")->check(CLI::ExistingFile);
    feedback->add_option("--out", fb_out, "Output JSONL (default stdout)");

    // pair
    auto* pair = app.add_subcommand("pair", "Build corrector training pairs from M and M* outputs");
    std::string pair_out;
    pair->add_option("--out", pair_out, "Training records JSONL (default stdout)");

    // refine
    auto* refine_cmd = app.add_subcommand("refine", "Generate and correct until clean or out of budget");
    std::string refine_out;
    std::vector<std::string> refine_ids;
    bool refine_no_store = false;
    refine_cmd->add_option("--query-id", refine_ids, "Restrict to these query ids");
    refine_cmd->add_option("--out", refine_out, "Trace JSONL (default stdout)");
    refine_cmd->add_flag("--no-store", refine_no_store, "Do not record the graphs in the store");

    // eval
    auto* eval = app.add_subcommand("eval", "Repetition metrics before and after feedback");
    std::string eval_before, eval_after, eval_traces, eval_json;
    std::string eval_before_source = "GeneratorM", eval_after_source = "Corrector";
    eval->add_option("--before", eval_before, "JSONL of {\"domain\", \"graph\"} records")->check(CLI::ExistingFile);
    eval->add_option("--after", eval_after, "JSONL of {\"domain\", \"graph\"} records")->check(CLI::ExistingFile);
    eval->add_option("--traces", eval_traces, "Trace JSONL from refine: initial vs final graphs")
        ->check(CLI::ExistingFile)
        ->excludes("--before")
        ->excludes("--after");
    eval->add_option("--before-source", eval_before_source, "Store source used when --before is absent");
    eval->add_option("--after-source", eval_after_source, "Store source used when --after is absent");
    eval->add_option("--json", eval_json, "Also write the rows as JSON to this file ('-' for stdout)");

    // classifier-inputs
    auto* classify = app.add_subcommand("classifier-inputs", "Emit classifier input records for stored queries");
    std::string cls_mode = "baseline", cls_out;
    classify->add_option("--mode", cls_mode, "baseline, with-m or with-g");
    classify->add_option("--out", cls_out, "Output JSONL (default stdout)");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string serve_host;
    std::optional<int> serve_port;
    serve->add_option("--host", serve_host, "Listen address");
    serve->add_option("--port", serve_port, "Listen port");

    CLI11_PARSE(app, argc, argv);

    try {
        const WorkbenchConfig cfg = resolve(globals);

        if (*ingest) {
            Store store(cfg.store_dir);
            const auto result =
                ingest_queries(store, ingest_file, *parse_ingest_format(ingest_format), domain_arg(ingest_domain));
            for (const auto& e : result.errors) std::cerr << ingest_file << ":" << e.line << ": " << e.message << '\n';
            std::cout << "added " << result.added << ", duplicates " << result.duplicates << ", errors "
                      << result.errors.size() << '\n';
            return 0;
        }

        if (*generate) {
            Store store(cfg.store_dir);
            const Variant variant = *parse_variant(gen_variant);
            const auto gen = make_generator(variant == Variant::M ? cfg.gen_m : cfg.gen_mstar, cfg.oracle);
            const auto source = variant == Variant::M ? GraphSource::GeneratorM : GraphSource::GeneratorMStar;
            Output out(gen_out);
            int failed = 0;
            for (const auto& q : select_queries(store, gen_ids)) {
                try {
                    GenerationResult result = gen->generate(q, variant);
                    Feedback fb = run_oracle(result.graph, cfg.oracle);
                    out.line(to_json(store.add_graph(q.id, source, std::move(result.graph), std::move(fb))));
                } catch (const IoError&) {
                    throw;
                } catch (const Error& e) {
                    ++failed;
                    std::cerr << q.id << ": " << e.what() << '\n';
                }
            }
            return failed == 0 ? 0 : 1;
        }

        if (*feedback) {
            Output out(fb_out);
            if (!fb_graph.empty()) {
                out.line(to_json(run_oracle(graph_from_json(json(fb_graph)), cfg.oracle)));
            } else if (!fb_graphs.empty()) {
                for (const json& j : read_jsonl(fb_graphs)) {
                    json line = to_json(run_oracle(graph_from_json(j.is_object() && j.contains("graph") ? j["graph"] : j),
                                                   cfg.oracle));
                    if (j.is_object() && j.contains("id")) line["id"] = j["id"];
                    out.line(line);
                }
            } else {
                Store store(cfg.store_dir);
                for (const auto& r : store.list()) {
                    json line = to_json(run_oracle(r.graph, cfg.oracle));
                    line["graph_id"] = r.id;
                    out.line(line);
                }
            }
            return 0;
        }

        if (*pair) {
            Store store(cfg.store_dir);
            const auto queries = store.queries();
            const auto gen_m = make_generator(cfg.gen_m, cfg.oracle);
            const auto gen_mstar = make_generator(cfg.gen_mstar, cfg.oracle);
            const TrainingData data = build_training_data(queries, *gen_m, *gen_mstar, cfg.oracle);
            Output out(pair_out);
            std::size_t flagged = 0;
            for (const auto& ex : data.examples) {
                out.line(training_record(ex));
                if (!ex.feedback.clean()) ++flagged;
            }
            for (const auto& f : data.failures) std::cerr << f.query_id << ": " << f.reason << '\n';
            std::cerr << "queries " << queries.size() << ", retained " << data.examples.size() << " (" << flagged
                      << " with feedback), dropped " << queries.size() - data.examples.size() - data.failures.size()
                      << ", failed " << data.failures.size() << '\n';
            return 0;
        }

        if (*refine_cmd) {
            Store store(cfg.store_dir);
            const auto queries = select_queries(store, refine_ids);
            const auto gen = make_generator(cfg.gen_m, cfg.oracle);
            const auto corrector = make_generator(cfg.corrector, cfg.oracle);
            const auto traces = refine_corpus(queries, *gen, *corrector, cfg.oracle, cfg.max_iters);
            Output out(refine_out);
            std::map<Termination, std::size_t> counts;
            for (const auto& t : traces) {
                ++counts[t.terminated];
                json line = to_json(t);
                if (!refine_no_store && t.terminated != Termination::GeneratorError) {
                    std::vector<Store::NewGraph> chain;
                    chain.push_back({GraphSource::GeneratorM, *t.initial, run_oracle(*t.initial, cfg.oracle)});
                    for (const auto& step : t.iterations) {
                        chain.push_back({GraphSource::Corrector, step.corrected, run_oracle(step.corrected, cfg.oracle)});
                    }
                    json ids = json::array();
                    for (const auto& r : store.add_graph_chain(t.query.id, std::move(chain))) ids.push_back(r.id);
                    line["graph_ids"] = ids;
                }
                out.line(line);
            }
            std::cerr << "Clean " << counts[Termination::Clean] << ", MaxItersExhausted "
                      << counts[Termination::MaxItersExhausted] << ", GeneratorError "
                      << counts[Termination::GeneratorError] << '\n';
            return counts[Termination::GeneratorError] == 0 ? 0 : 1;
        }

        if (*eval) {
            std::optional<Store> store;
            auto side = [&](const std::string& file, const std::string& source) {
                if (!file.empty()) return graphs_from_file(file);
                if (!store) store.emplace(cfg.store_dir);
                return graphs_from_store(*store, source_arg(source));
            };
            DomainGraphs before, after;
            if (!eval_traces.empty()) {
                std::tie(before, after) = graphs_from_traces(eval_traces);
            } else {
                before = side(eval_before, eval_before_source);
                after = side(eval_after, eval_after_source);
            }
            std::vector<ComparisonRow> rows;
            for (Domain d : {Domain::Atomic, Domain::Snli, Domain::Social}) {
                auto b = before.find(d);
                auto a = after.find(d);
                if (b == before.end() || a == after.end()) continue;
                rows.push_back({std::string(domain_name(d)), repetition_report(b->second, cfg.oracle, d),
                                repetition_report(a->second, cfg.oracle, d)});
            }
            if (rows.empty()) throw EmptyCorpusError();
            if (rows.size() > 1) rows.push_back(average_row(rows));
            std::cout << render_comparison_table(rows);
            if (!eval_json.empty()) {
                json out = json::array();
                for (const auto& r : rows) {
                    json before_j = to_json(r.before);
                    json after_j = to_json(r.after);
                    if (r.name == "average") {
                        before_j.erase("domain");
                        after_j.erase("domain");
                    }
                    out.push_back({{"name", r.name}, {"before", before_j}, {"after", after_j}});
                }
                Output(eval_json).stream() << out.dump(2) << '\n';
            }
            return 0;
        }

        if (*classify) {
            const auto mode = parse_classifier_mode(cls_mode);
            if (!mode) throw Error("unknown mode '" + cls_mode + "'");
            Store store(cfg.store_dir);
            // Latest graph per query from the sources the mode draws on.
            std::map<std::string, InfluenceGraph> latest;
            if (*mode != ClassifierMode::Baseline) {
                const std::vector<GraphSource> sources =
                    *mode == ClassifierMode::WithM
                        ? std::vector<GraphSource>{GraphSource::GeneratorM}
                        : std::vector<GraphSource>{GraphSource::Corrector, GraphSource::HumanAccepted};
                for (const auto& r : store.list()) {
                    if (std::find(sources.begin(), sources.end(), r.source) != sources.end()) {
                        latest.insert_or_assign(r.query_id, r.graph);
                    }
                }
            }
            Output out(cls_out);
            std::size_t missing = 0;
            for (const auto& q : store.queries()) {
                const InfluenceGraph* g = nullptr;
                if (auto it = latest.find(q.id); it != latest.end()) g = &it->second;
                if (*mode != ClassifierMode::Baseline && g == nullptr) {
                    ++missing;
                    continue;
                }
                out.line(classifier_record(q, g, *mode));
            }
            if (missing > 0) std::cerr << "skipped " << missing << " queries without a graph\n";
            return 0;
        }

        if (*serve) {
            Store store(cfg.store_dir);
            ServiceDeps deps{make_generator(cfg.gen_m, cfg.oracle), make_generator(cfg.gen_mstar, cfg.oracle),
                             make_generator(cfg.corrector, cfg.oracle), cfg.oracle, cfg.max_iters};
            Service service(store, std::move(deps));
            const std::string host = serve_host.empty() ? cfg.host : serve_host;
            const int port = service.bind(host, serve_port.value_or(cfg.port));
            if (port <= 0) throw IoError("cannot bind " + host);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on http://" << host << ":" << port << " (store " << cfg.store_dir << ")\n";
            service.run();
            g_service = nullptr;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "defgraph: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
