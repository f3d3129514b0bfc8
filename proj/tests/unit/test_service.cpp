#include <doctest.h>

#include "defgraph/service.hpp"
#include "test_support.hpp"

using namespace defgraph;
using namespace defgraph::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        char tmpl[] = "/tmp/defgraph-svc-XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

ServiceDeps mock_deps() {
    ServiceDeps deps;
    deps.gen_m = std::make_shared<MockGenerator>(1, 1.0);
    deps.gen_mstar = std::make_shared<MockGenerator>(2, 0.0);
    deps.corrector = std::make_shared<RepairCorrector>();
    return deps;
}

// Store + service on an ephemeral port, serving on a background thread.
struct Workbench {
    TempDir dir;
    Store store{dir.path};
    Service service;
    std::thread thread;
    std::unique_ptr<httplib::Client> client;

    explicit Workbench(ServiceDeps deps = mock_deps()) : service(store, std::move(deps)) {
        for (int i = 0; i < 3; ++i) {
            store.put_query(make_query(i, InferenceLabel::Strengthener, static_cast<Domain>(i % 3)));
        }
        const int port = service.bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        thread = std::thread([this] { service.run(); });
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        client->set_read_timeout(10, 0);
        for (int i = 0; i < 100 && !client->Get("/edge-template"); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
    }
    ~Workbench() {
        service.stop();
        thread.join();
    }

    std::pair<int, json> get(const std::string& path) {
        auto res = client->Get(path);
        REQUIRE(res);
        return {res->status, json::parse(res->body)};
    }
    std::pair<int, json> post(const std::string& path, const json& body) { return post_raw(path, body.dump()); }
    std::pair<int, json> post_raw(const std::string& path, const std::string& body) {
        auto res = client->Post(path, body, "application/json");
        REQUIRE(res);
        return {res->status, json::parse(res->body)};
    }
};

}  // namespace

TEST_CASE("GET /queries and /edge-template") {
    Workbench wb;
    auto [status, body] = wb.get("/queries");
    CHECK(status == 200);
    REQUIRE(body.size() == 3);
    CHECK(body[0]["id"] == "q0");
    CHECK(body[0]["hypothesis"] == "rocks become smaller");

    auto [s2, edges] = wb.get("/edge-template");
    CHECK(s2 == 200);
    CHECK(edges.size() == 10);
    CHECK(edges[0].contains("polarity"));
}

TEST_CASE("POST /generate stores the graph with its feedback") {
    Workbench wb;
    auto [status, body] = wb.post("/generate", {{"query_id", "q0"}});
    CHECK(status == 200);
    CHECK(body["source"] == "GeneratorM");
    CHECK(body["query_id"] == "q0");
    const std::string id = body["id"];
    CHECK(wb.store.get(id).source == GraphSource::GeneratorM);

    auto [s2, star] = wb.post("/generate", {{"query_id", "q1"}, {"variant", "mstar"}});
    CHECK(s2 == 200);
    CHECK(star["source"] == "GeneratorMStar");

    auto [s3, one] = wb.get("/graphs/" + id);
    CHECK(s3 == 200);
    CHECK(one["id"] == id);
    auto [s4, listed] = wb.get("/graphs?source=GeneratorMStar");
    CHECK(s4 == 200);
    CHECK(listed.size() == 1);
}

TEST_CASE("POST /feedback reports overlapping roles") {
    Workbench wb;
    const auto [_, g] = wb.post("/generate", {{"query_id", "q0"}});
    auto [status, fb] = wb.post("/feedback", {{"graph_id", g["id"]}});
    CHECK(status == 200);
    CHECK(fb["rendered"].get<std::string>().find("are overlapping") != std::string::npos);
    CHECK(fb["graph_id"] == g["id"]);
    CHECK_FALSE(fb["clusters"].empty());
}

TEST_CASE("POST /refine reaches a clean graph and stores the chain") {
    Workbench wb;
    auto [status, trace] = wb.post("/refine", {{"query_id", "q0"}});
    CHECK(status == 200);
    CHECK(trace["terminated"] == "Clean");
    REQUIRE(trace["graph_ids"].size() == 2);
    const auto last = wb.store.get(trace["graph_ids"][1].get<std::string>());
    CHECK(last.source == GraphSource::Corrector);
    CHECK(last.feedback.clean());
    CHECK(last.parent_id == trace["graph_ids"][0].get<std::string>());
}

TEST_CASE("POST /correct hands human feedback to the corrector verbatim") {
    auto recorder = std::make_shared<RecordingCorrector>(std::make_shared<RepairCorrector>());
    ServiceDeps deps = mock_deps();
    deps.corrector = recorder;
    Workbench wb(deps);
    const auto [_, g] = wb.post("/generate", {{"query_id", "q0"}});
    const std::string human = "M- and M+ say the same thing | please   fix \"this\"";
    auto [status, out] = wb.post("/correct", {{"graph_id", g["id"]}, {"feedback_text", human}});
    CHECK(status == 200);
    CHECK(out["feedback_text"] == human);
    CHECK(out["parent_id"] == g["id"]);
    CHECK(out["source"] == "Corrector");
    REQUIRE(recorder->seen().size() == 1);
    CHECK(recorder->seen()[0] == human);

    // Without feedback_text the oracle's rendering is used.
    auto [s2, auto_fb] = wb.post("/correct", {{"graph_id", g["id"]}});
    CHECK(s2 == 200);
    CHECK(recorder->seen().back() == wb.store.get(g["id"]).feedback.rendered);
}

TEST_CASE("POST /correct reaches a remote corrector byte-for-byte") {
    StubServer stub([](const std::string& input) { return StubServer::ok(last_field(input)); });
    ServiceDeps deps = mock_deps();
    deps.corrector = std::make_shared<RemoteGenerator>(remote_spec(stub.endpoint()));
    Workbench wb(deps);
    const auto [_, g] = wb.post("/generate", {{"query_id", "q2"}});
    const std::string human = "S and S- overlap; also \\ backslash";
    auto [status, out] = wb.post("/correct", {{"graph_id", g["id"]}, {"feedback_text", human}});
    CHECK(status == 200);
    REQUIRE(stub.inputs().size() == 1);
    CHECK(stub.inputs()[0].find(" || " + human + " || ") != std::string::npos);
}

TEST_CASE("POST /review files accepted graphs under HumanAccepted") {
    Workbench wb;
    const auto [_, g] = wb.post("/generate", {{"query_id", "q0"}});
    auto [status, out] = wb.post("/review", {{"graph_id", g["id"]}, {"human_feedback", "good"}, {"accepted", true}});
    CHECK(status == 200);
    CHECK(out["reviewed"]["review"]["accepted"] == true);
    REQUIRE(out["accepted"].is_object());
    auto [s2, accepted] = wb.get("/graphs?source=HumanAccepted");
    CHECK(s2 == 200);
    REQUIRE(accepted.size() == 1);
    CHECK(accepted[0]["parent_id"] == g["id"]);

    auto [s3, rejected] = wb.post("/review", {{"graph_id", g["id"]}, {"accepted", false}});
    CHECK(s3 == 200);
    CHECK(rejected["accepted"].is_null());
}

TEST_CASE("GET /metrics equals the offline computation") {
    Workbench wb;
    for (int round = 0; round < 4; ++round) {
        for (const char* q : {"q0", "q1", "q2"}) {
            wb.post("/generate", {{"query_id", q}});
            wb.post("/generate", {{"query_id", q}, {"variant", "mstar"}});
        }
    }
    auto [status, online] = wb.get("/metrics");
    CHECK(status == 200);
    CHECK(online == metrics_json(wb.store, {}, OracleConfig{}));
    CHECK(online["n_graphs"] == 24);
    CHECK(online["by_domain"].size() == 3);

    auto [s2, m_only] = wb.get("/metrics?source=GeneratorM");
    CHECK(s2 == 200);
    CHECK(m_only == metrics_json(wb.store, {.source = GraphSource::GeneratorM}, OracleConfig{}));
    CHECK(m_only["pct_with_repetitions"] == 100.0);

    auto [s3, star] = wb.get("/metrics?source=GeneratorMStar&domain=snli");
    CHECK(s3 == 200);
    CHECK(star["rep_per_graph"] == 0.0);
    CHECK(star["n_graphs"] == 4);
}

TEST_CASE("error mapping: 404, 400, 502 and no partial writes") {
    Workbench wb;
    CHECK(wb.post("/generate", {{"query_id", "nope"}}).first == 404);
    CHECK(wb.get("/graphs/g-404404").first == 404);
    CHECK(wb.post("/feedback", {{"graph_id", "g-404404"}}).first == 404);
    CHECK(wb.get("/metrics").first == 404);

    CHECK(wb.post_raw("/generate", "{not json").first == 400);
    CHECK(wb.post("/generate", json::array()).first == 400);
    CHECK(wb.post("/generate", {{"query_id", 5}}).first == 400);
    CHECK(wb.post("/generate", {{"query_id", "q0"}, {"variant", "x"}}).first == 400);
    CHECK(wb.post("/refine", {{"query_id", "q0"}, {"max_iters", 0}}).first == 400);
    CHECK(wb.get("/graphs?source=Robot").first == 400);
    const auto [_, g] = wb.post("/generate", {{"query_id", "q0"}});
    CHECK(wb.post("/review", {{"graph_id", g["id"]}}).first == 400);
    CHECK(wb.post("/correct", {{"graph_id", g["id"]}, {"feedback_text", ""}}).first == 400);
    CHECK(wb.store.list().size() == 1);
}

TEST_CASE("generator failures map to 502 and leave the store unchanged") {
    StubServer down([](const std::string&) { return std::pair<int, std::string>{503, "{}"}; });
    StubServer garbage([](const std::string&) { return StubServer::ok("definitely not a graph"); });
    ServiceDeps deps = mock_deps();
    deps.gen_m = std::make_shared<RemoteGenerator>(remote_spec(down.endpoint(), 0));
    deps.corrector = std::make_shared<RemoteGenerator>(remote_spec(garbage.endpoint(), 0));
    Workbench wb(deps);

    CHECK(wb.post("/generate", {{"query_id", "q0"}}).first == 502);
    auto [status, body] = wb.post("/refine", {{"query_id", "q0"}});
    CHECK(status == 502);
    CHECK(body["trace"]["terminated"] == "GeneratorError");
    CHECK(wb.store.list().empty());

    const auto [s_ok, g] = wb.post("/generate", {{"query_id", "q0"}, {"variant", "mstar"}});
    REQUIRE(s_ok == 200);
    CHECK(wb.post("/correct", {{"graph_id", g["id"]}, {"feedback_text", "fix"}}).first == 502);
    CHECK(wb.store.list().size() == 1);
}

TEST_CASE("CORS headers are present") {
    Workbench wb;
    auto res = wb.client->Get("/queries");
    REQUIRE(res);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
}
