#pragma once

// JSON-over-HTTP API for the review workbench.
//
//   GET  /queries
//   GET  /graphs?source=&query_id=&domain=      GET /graphs/{id}
//   GET  /edge-template
//   POST /generate  {query_id, variant}
//   POST /feedback  {graph_id}
//   POST /correct   {graph_id, feedback_text}   feedback_text reaches the corrector verbatim
//   POST /refine    {query_id, max_iters}
//   POST /review    {graph_id, human_feedback, accepted}
//   GET  /metrics?source=&domain=
//
// 400 malformed request, 404 unknown id, 502 generator failure. Mutations
// write to the store only after every generator call has succeeded.

#include <memory>
#include <string>

#include "defgraph/generators.hpp"
#include "defgraph/oracle.hpp"
#include "defgraph/store.hpp"

namespace httplib {
class Server;
}

namespace defgraph {

struct ServiceDeps {
    std::shared_ptr<const GraphGenerator> gen_m;
    std::shared_ptr<const GraphGenerator> gen_mstar;
    std::shared_ptr<const GraphGenerator> corrector;
    OracleConfig oracle;
    int default_max_iters = 3;
};

/// Offline equivalent of GET /metrics: overall report plus one per domain present.
json metrics_json(const Store& store, const GraphFilter& filter, const OracleConfig& cfg);

class Service {
public:
    Service(Store& store, ServiceDeps deps);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Requires a successful bind().
    void run();
    void stop();

private:
    void install_routes();

    Store& store_;
    ServiceDeps deps_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace defgraph
