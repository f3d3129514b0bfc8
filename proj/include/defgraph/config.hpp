#pragma once

// Workbench settings. File format is one `key = value` per line, `#` starts a
// comment. Recognized keys:
//
//   oracle.threshold, oracle.stopwords, oracle.negation_cues   (lists: comma separated)
//   {m,mstar,corrector}.kind            remote | mock | repair
//   {m,mstar,corrector}.endpoint        http://host:port[/prefix]
//   {m,mstar,corrector}.timeout_ms, .retries, .max_in_flight, .max_new_tokens
//   {m,mstar,corrector}.seed, .plant_probability                (mock)
//   store.dir, service.host, service.port, pipeline.max_iters
//
// Environment overrides: DEFGRAPH_M_ENDPOINT, DEFGRAPH_MSTAR_ENDPOINT,
// DEFGRAPH_CORRECTOR_ENDPOINT (each switches that generator to remote),
// DEFGRAPH_PORT, DEFGRAPH_STORE.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include "defgraph/generators.hpp"
#include "defgraph/oracle.hpp"

namespace defgraph {

inline GeneratorSpec mock_spec(std::uint64_t seed, double plant_probability) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::Mock;
    spec.seed = seed;
    spec.plant_probability = plant_probability;
    return spec;
}

inline GeneratorSpec repair_spec() {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::Repair;
    return spec;
}

struct WorkbenchConfig {
    OracleConfig oracle;
    GeneratorSpec gen_m = mock_spec(1, 0.7);
    GeneratorSpec gen_mstar = mock_spec(2, 0.0);
    GeneratorSpec corrector = repair_spec();
    std::string store_dir = "defgraph-store";
    std::string host = "127.0.0.1";
    int port = 8080;
    int max_iters = 3;

    void validate() const;
};

/// Throws Error naming the key on unknown keys or bad values.
void apply_setting(WorkbenchConfig& cfg, std::string_view key, std::string_view value);

/// Throws IoError-like Error when unreadable; line-numbered Error on bad lines.
WorkbenchConfig load_config(const std::filesystem::path& path);

/// `getenv` is injectable for tests.
void apply_env_overrides(WorkbenchConfig& cfg,
                         const std::function<const char*(const char*)>& getenv = [](const char* n) {
                             return std::getenv(n);
                         });

}  // namespace defgraph
