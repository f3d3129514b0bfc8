#pragma once

// Graph generators (M, M*) and correctors (G) behind one interface.
//
//   Remote  POST <endpoint>/generate {"input", "max_new_tokens"} -> {"output"}
//   Mock    deterministic graphs from (seed, query) with planted repetitions
//   Repair  rule-based corrector that rewrites cluster members until clean

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>

#include "defgraph/codec.hpp"
#include "defgraph/graph.hpp"
#include "defgraph/oracle.hpp"

namespace defgraph {

/// M sees P || H || S; M* additionally sees the answer T.
enum class Variant { M, MStar };

std::string_view variant_name(Variant variant) noexcept;  // "m" / "mstar"
std::optional<Variant> parse_variant(std::string_view text) noexcept;

enum class GeneratorKind { Remote, Mock, Repair };

std::string_view generator_kind_name(GeneratorKind kind) noexcept;
std::optional<GeneratorKind> parse_generator_kind(std::string_view text) noexcept;

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Mock;
    std::string endpoint;  // Remote only, e.g. "http://127.0.0.1:9000"
    std::chrono::milliseconds timeout{30'000};
    int retries = 2;
    std::uint64_t seed = 1;          // Mock only
    double plant_probability = 0.0;  // Mock only: chance a generated graph carries repetitions
    int max_new_tokens = 512;
    int max_in_flight = 4;  // Remote only

    void validate() const;
};

struct GenerationRequest {
    std::string input;
    int max_new_tokens = 512;
};

struct GenerationResult {
    InfluenceGraph graph;
    ParseReport report;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class MissingLabelError : public Error {
public:
    explicit MissingLabelError(std::string_view query_id);
};

inline constexpr std::string_view kFieldSeparator = " || ";

/// "P || H || S" for M, "P || H || S || strengthener|weakener" for M*.
std::string format_generator_input(const DefeasibleQuery& query, Variant variant);

/// Corrector prompt: "<M prompt> || <feedback> || <encoded graph>".
/// `feedback` is inserted byte-for-byte.
std::string format_training_input(const DefeasibleQuery& query, std::string_view feedback, const InfluenceGraph& graph);

class GraphGenerator {
public:
    virtual ~GraphGenerator() = default;

    /// Throws TransportError, UnparseableError, MissingLabelError.
    virtual GenerationResult generate(const DefeasibleQuery& query, Variant variant) const = 0;

    /// `feedback` is either an oracle rendering or free-form human text.
    virtual GenerationResult correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                                     std::string_view feedback) const = 0;
};

/// Rewrites every non-first member of each cluster until the oracle is clean.
/// Postcondition: detect_clusters(result, cfg) is empty.
InfluenceGraph repair_correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                              std::span<const RoleCluster> clusters, const OracleConfig& cfg);

/// Phrase appended by repair_correct, e.g. "opposite condition" for S-.
std::string_view role_qualifier(NodeRole role) noexcept;

class MockGenerator final : public GraphGenerator {
public:
    MockGenerator(std::uint64_t seed, double plant_probability, OracleConfig cfg = {});

    GenerationResult generate(const DefeasibleQuery& query, Variant variant) const override;
    /// Restores every cluster member to its unplanted label.
    GenerationResult correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                             std::string_view feedback) const override;

    /// The graph before any repetitions are planted.
    InfluenceGraph base_graph(const DefeasibleQuery& query, Variant variant) const;

private:
    std::uint64_t seed_;
    double plant_probability_;
    OracleConfig cfg_;
};

class RepairCorrector final : public GraphGenerator {
public:
    explicit RepairCorrector(OracleConfig cfg = {});

    /// Throws Error: a corrector cannot generate from scratch.
    GenerationResult generate(const DefeasibleQuery& query, Variant variant) const override;
    GenerationResult correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                             std::string_view feedback) const override;

private:
    OracleConfig cfg_;
};

class RemoteGenerator final : public GraphGenerator {
public:
    explicit RemoteGenerator(GeneratorSpec spec);

    GenerationResult generate(const DefeasibleQuery& query, Variant variant) const override;
    GenerationResult correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                             std::string_view feedback) const override;

    /// One request/response exchange with retries; returns the raw "output" string.
    std::string complete(const GenerationRequest& request) const;

private:
    GenerationResult decode_or_throw(const std::string& output) const;

    GeneratorSpec spec_;
    std::string scheme_host_port_;
    std::string path_;

    mutable std::mutex slots_mutex_;
    mutable std::condition_variable slots_cv_;
    mutable int in_flight_ = 0;
};

std::shared_ptr<GraphGenerator> make_generator(const GeneratorSpec& spec, const OracleConfig& cfg);

}  // namespace defgraph
