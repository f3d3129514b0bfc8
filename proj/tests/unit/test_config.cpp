#include <doctest.h>

#include <fstream>

#include "defgraph/config.hpp"

using namespace defgraph;

namespace {

std::filesystem::path write_config(const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / "defgraph-test.conf";
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("defaults are valid and use the offline generators") {
    WorkbenchConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.gen_m.kind == GeneratorKind::Mock);
    CHECK(cfg.corrector.kind == GeneratorKind::Repair);
    CHECK(cfg.oracle.overlap_threshold == doctest::Approx(0.8));
    CHECK(cfg.max_iters == 3);
}

TEST_CASE("config file parsing") {
    const auto path = write_config(
        "# workbench\n"
        "oracle.threshold = 0.6\n"
        "oracle.negation_cues = no, never ,not\n"
        "\n"
        "m.kind = remote   # served model\n"
        "m.endpoint = http://gpu:9000/v1\n"
        "m.retries = 4\n"
        "m.timeout_ms = 1500\n"
        "mstar.plant_probability = 0.25\n"
        "store.dir = /data/store\n"
        "service.port = 9191\n"
        "pipeline.max_iters = 5\n");
    const WorkbenchConfig cfg = load_config(path);
    CHECK(cfg.oracle.overlap_threshold == doctest::Approx(0.6));
    CHECK(cfg.oracle.negation_cues == std::set<std::string>{"never", "no", "not"});
    CHECK(cfg.gen_m.kind == GeneratorKind::Remote);
    CHECK(cfg.gen_m.endpoint == "http://gpu:9000/v1");
    CHECK(cfg.gen_m.retries == 4);
    CHECK(cfg.gen_m.timeout == std::chrono::milliseconds(1500));
    CHECK(cfg.gen_mstar.plant_probability == doctest::Approx(0.25));
    CHECK(cfg.store_dir == "/data/store");
    CHECK(cfg.port == 9191);
    CHECK(cfg.max_iters == 5);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("bad config lines name the line and key") {
    auto message = [](const std::string& content) {
        try {
            (void)load_config(write_config(content));
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("oracle.treshold = 0.5\n").find(":1: unknown config key 'oracle.treshold'") != std::string::npos);
    CHECK(message("\nservice.port = eighty\n").find(":2:") != std::string::npos);
    CHECK(message("just words\n").find("expected 'key = value'") != std::string::npos);
    CHECK(message("m.kind = quantum\n").find("unknown kind") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/defgraph.conf"), Error);

    WorkbenchConfig cfg;
    apply_setting(cfg, "oracle.threshold", "1.5");
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("environment overrides") {
    WorkbenchConfig cfg;
    const std::map<std::string, std::string> env{{"DEFGRAPH_CORRECTOR_ENDPOINT", "http://127.0.0.1:7000"},
                                                 {"DEFGRAPH_PORT", "8181"},
                                                 {"DEFGRAPH_STORE", "/tmp/s"},
                                                 {"DEFGRAPH_M_ENDPOINT", ""}};
    apply_env_overrides(cfg, [&env](const char* name) -> const char* {
        auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(cfg.corrector.kind == GeneratorKind::Remote);
    CHECK(cfg.corrector.endpoint == "http://127.0.0.1:7000");
    CHECK(cfg.gen_m.kind == GeneratorKind::Mock);
    CHECK(cfg.port == 8181);
    CHECK(cfg.store_dir == "/tmp/s");
}
