#include "defgraph/generators.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace defgraph {

namespace {

using json = nlohmann::json;

// Disjoint per-role vocabularies: unplanted mock graphs never overlap.
constexpr std::size_t kPoolSize = 16;
constexpr std::array<std::array<std::string_view, kPoolSize>, kRoleCount> kRolePools{{
    {"drought", "frost", "shade", "barrier", "shortage", "delay", "erosion", "fatigue",
     "silence", "debt", "illness", "fog", "rust", "traffic", "storm", "doubt"},
    {"sunshine", "funding", "practice", "support", "training", "rainfall", "harvest", "savings",
     "teamwork", "warmth", "discount", "shelter", "guidance", "momentum", "market", "talent"},
    {"waves", "tide", "wind", "crowd", "exam", "promotion", "festival", "flood",
     "party", "deadline", "journey", "concert", "outage", "strike", "diet", "contest"},
    {"calm", "stillness", "emptiness", "cancellation", "vacancy", "dryness", "idleness", "retreat",
     "absence", "standstill", "postponement", "lull", "pause", "quiet", "stasis", "withdrawal"},
    {"loss", "decline", "shrinkage", "damage", "weakness", "fading", "collapse", "slump",
     "friction", "wear", "strain", "drain", "leak", "setback", "decay", "slowdown"},
    {"gain", "growth", "surge", "boost", "spread", "rise", "expansion", "acceleration",
     "upswing", "increase", "buildup", "spike", "rally", "uplift", "swell", "progress"},
    {"success", "victory", "approval", "recovery", "comfort", "safety", "profit", "praise",
     "relief", "arrival", "completion", "balance", "harmony", "trust", "clarity", "reward"},
    {"failure", "defeat", "rejection", "relapse", "discomfort", "danger", "deficit", "blame",
     "panic", "departure", "abandonment", "imbalance", "conflict", "suspicion", "confusion", "penalty"},
}};

constexpr std::array<std::string_view, kRoleCount> kQualifiers{
    "hindering context", "supporting context", "stated situation", "opposite condition",
    "weakening factor",  "amplifying factor",  "hypothesis holds", "hypothesis fails"};

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    h ^= 0xff;  // field terminator
    h *= kFnvPrime;
}

std::uint64_t query_hash(std::uint64_t seed, const DefeasibleQuery& q, Variant variant) {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, std::to_string(seed));
    fnv_mix(h, q.id);
    fnv_mix(h, q.premise);
    fnv_mix(h, q.hypothesis);
    fnv_mix(h, q.update);
    fnv_mix(h, q.label ? label_name(*q.label) : "");
    fnv_mix(h, variant_name(variant));
    return h;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

InfluenceGraph::Labels base_labels(std::mt19937_64& rng) {
    InfluenceGraph::Labels labels;
    for (std::size_t r = 0; r < kRoleCount; ++r) {
        std::array<std::size_t, kPoolSize> idx{};
        for (std::size_t i = 0; i < kPoolSize; ++i) idx[i] = i;
        std::string label;
        for (std::size_t w = 0; w < 3; ++w) {
            std::swap(idx[w], idx[w + pick(rng, kPoolSize - w)]);
            if (!label.empty()) label.push_back(' ');
            label += kRolePools[r][idx[w]];
        }
        labels[r] = std::move(label);
    }
    return labels;
}

void check_label_requirement(const DefeasibleQuery& query, Variant variant) {
    if (variant == Variant::MStar && !query.label) throw MissingLabelError(query.id);
}

GenerationResult through_codec(const InfluenceGraph& graph) {
    ParseReport report = decode(encode(graph));
    return {*report.graph, std::move(report)};
}

bool clashes(const InfluenceGraph::Labels& labels, std::size_t slot, std::string_view candidate,
             const OracleConfig& cfg) {
    for (std::size_t other = 0; other < kRoleCount; ++other) {
        if (other != slot && is_repetition(candidate, labels[other], cfg)) return true;
    }
    return false;
}

std::string fresh_label(const InfluenceGraph::Labels& labels, const OracleConfig& cfg) {
    std::set<std::string> used;
    for (const auto& label : labels) {
        for (auto& t : normalize_tokens(label, cfg)) used.insert(std::move(t));
    }
    for (int k = 1;; ++k) {
        std::string token = "variant" + std::to_string(k);
        if (used.count(token) == 0) return token;
    }
}

}  // namespace

std::string_view variant_name(Variant variant) noexcept { return variant == Variant::M ? "m" : "mstar"; }

std::optional<Variant> parse_variant(std::string_view text) noexcept {
    if (text == "m" || text == "M") return Variant::M;
    if (text == "mstar" || text == "MStar" || text == "m*" || text == "M*") return Variant::MStar;
    return std::nullopt;
}

std::string_view generator_kind_name(GeneratorKind kind) noexcept {
    switch (kind) {
        case GeneratorKind::Remote: return "remote";
        case GeneratorKind::Mock: return "mock";
        case GeneratorKind::Repair: return "repair";
    }
    return "mock";
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view text) noexcept {
    if (text == "remote") return GeneratorKind::Remote;
    if (text == "mock") return GeneratorKind::Mock;
    if (text == "repair") return GeneratorKind::Repair;
    return std::nullopt;
}

void GeneratorSpec::validate() const {
    if (kind == GeneratorKind::Remote && endpoint.empty()) throw Error("remote generator requires an endpoint");
    if (retries < 0) throw Error("retries must be >= 0");
    if (max_in_flight < 1) throw Error("max_in_flight must be >= 1");
    if (plant_probability < 0.0 || plant_probability > 1.0) throw Error("plant_probability must be in [0, 1]");
}

MissingLabelError::MissingLabelError(std::string_view query_id)
    : Error("query '" + std::string(query_id) + "' has no label; the M* variant needs one") {}

std::string format_generator_input(const DefeasibleQuery& query, Variant variant) {
    check_label_requirement(query, variant);
    std::string out = query.premise;
    out += kFieldSeparator;
    out += query.hypothesis;
    out += kFieldSeparator;
    out += query.update;
    if (variant == Variant::MStar) {
        out += kFieldSeparator;
        out += label_name(*query.label);
    }
    return out;
}

std::string format_training_input(const DefeasibleQuery& query, std::string_view feedback, const InfluenceGraph& graph) {
    std::string out = format_generator_input(query, Variant::M);
    out += kFieldSeparator;
    out += feedback;
    out += kFieldSeparator;
    out += encode(graph);
    return out;
}

std::string_view role_qualifier(NodeRole role) noexcept { return kQualifiers[role_index(role)]; }

InfluenceGraph repair_correct([[maybe_unused]] const DefeasibleQuery& query, const InfluenceGraph& graph,
                              std::span<const RoleCluster> clusters, const OracleConfig& cfg) {
    InfluenceGraph::Labels labels = graph.labels();
    for (const RoleCluster& cluster : clusters) {
        for (std::size_t i = 1; i < cluster.size(); ++i) {
            const std::size_t slot = role_index(cluster[i]);
            const std::string_view qualifier = role_qualifier(cluster[i]);
            std::string candidate = labels[slot] + " (" + std::string(qualifier) + ")";
            if (clashes(labels, slot, candidate, cfg)) candidate = std::string(qualifier);
            if (clashes(labels, slot, candidate, cfg)) candidate = fresh_label(labels, cfg);
            labels[slot] = std::move(candidate);
        }
    }
    return InfluenceGraph::from_labels(std::move(labels));
}

// ---------------------------------------------------------------------------
// Mock
// ---------------------------------------------------------------------------

MockGenerator::MockGenerator(std::uint64_t seed, double plant_probability, OracleConfig cfg)
    : seed_(seed), plant_probability_(plant_probability), cfg_(std::move(cfg)) {}

InfluenceGraph MockGenerator::base_graph(const DefeasibleQuery& query, Variant variant) const {
    std::mt19937_64 rng(query_hash(seed_, query, variant));
    return InfluenceGraph::from_labels(base_labels(rng));
}

GenerationResult MockGenerator::generate(const DefeasibleQuery& query, Variant variant) const {
    check_label_requirement(query, variant);
    std::mt19937_64 rng(query_hash(seed_, query, variant));
    InfluenceGraph::Labels labels = base_labels(rng);

    if (unit(rng) < plant_probability_) {
        // Each plant copies a source label onto a fresh target; sources are
        // never overwritten, so the redundant-node count equals `copies`.
        const std::size_t copies = 1 + pick(rng, 3);
        std::array<bool, kRoleCount> target{};
        std::array<bool, kRoleCount> source{};
        for (std::size_t c = 0; c < copies; ++c) {
            std::vector<std::size_t> open_targets;
            for (std::size_t r = 0; r < kRoleCount; ++r) {
                if (!target[r] && !source[r]) open_targets.push_back(r);
            }
            const std::size_t t = open_targets[pick(rng, open_targets.size())];
            std::vector<std::size_t> open_sources;
            for (std::size_t r = 0; r < kRoleCount; ++r) {
                if (!target[r] && r != t) open_sources.push_back(r);
            }
            const std::size_t s = open_sources[pick(rng, open_sources.size())];
            target[t] = true;
            source[s] = true;
            labels[t] = labels[s];
        }
    }
    return through_codec(InfluenceGraph::from_labels(std::move(labels)));
}

GenerationResult MockGenerator::correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                                        std::string_view feedback) const {
    if (feedback == kCleanFeedback) return through_codec(graph);
    const InfluenceGraph base = base_graph(query, Variant::M);
    InfluenceGraph fixed = graph;
    for (const RoleCluster& cluster : detect_clusters(graph, cfg_)) {
        for (NodeRole role : cluster) fixed = fixed.with_node(role, base.label(role));
    }
    return through_codec(fixed);
}

// ---------------------------------------------------------------------------
// Repair
// ---------------------------------------------------------------------------

RepairCorrector::RepairCorrector(OracleConfig cfg) : cfg_(std::move(cfg)) {}

GenerationResult RepairCorrector::generate(const DefeasibleQuery&, Variant) const {
    throw Error("the repair corrector cannot generate graphs from a query");
}

GenerationResult RepairCorrector::correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                                          std::string_view feedback) const {
    if (feedback == kCleanFeedback) return through_codec(graph);
    const auto clusters = detect_clusters(graph, cfg_);
    return through_codec(repair_correct(query, graph, clusters, cfg_));
}

// ---------------------------------------------------------------------------
// Remote
// ---------------------------------------------------------------------------

RemoteGenerator::RemoteGenerator(GeneratorSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::string_view url = spec_.endpoint;
    std::string scheme = "http://";
    if (const auto pos = url.find("://"); pos != std::string_view::npos) {
        scheme = std::string(url.substr(0, pos + 3));
        url.remove_prefix(pos + 3);
    }
    if (scheme != "http://") throw Error("unsupported endpoint scheme in '" + spec_.endpoint + "'");
    const auto slash = url.find('/');
    scheme_host_port_ = scheme + std::string(url.substr(0, slash));
    std::string base = slash == std::string_view::npos ? "" : std::string(url.substr(slash));
    while (!base.empty() && base.back() == '/') base.pop_back();
    path_ = base + "/generate";
}

std::string RemoteGenerator::complete(const GenerationRequest& request) const {
    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [this] { return in_flight_ < spec_.max_in_flight; });
        ++in_flight_;
    }
    struct SlotRelease {
        const RemoteGenerator* self;
        ~SlotRelease() {
            {
                std::lock_guard lock(self->slots_mutex_);
                --self->in_flight_;
            }
            self->slots_cv_.notify_one();
        }
    } release{this};

    const std::string body = json{{"input", request.input}, {"max_new_tokens", request.max_new_tokens}}.dump();
    const auto timeout_s = spec_.timeout.count() / 1000;
    const auto timeout_us = (spec_.timeout.count() % 1000) * 1000;

    std::string last_error;
    for (int attempt = 0; attempt <= spec_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min(1000, 25 << attempt)));
        }
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(timeout_s, timeout_us);
        client.set_read_timeout(timeout_s, timeout_us);
        client.set_write_timeout(timeout_s, timeout_us);

        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            last_error = "request to " + scheme_host_port_ + path_ + " failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "generator returned HTTP " + std::to_string(res->status);
            if (res->status >= 500) continue;
            throw TransportError(last_error);
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.is_object() || !reply.contains("output") || !reply["output"].is_string()) {
            throw TransportError("generator reply is not {\"output\": <string>}");
        }
        return reply["output"].get<std::string>();
    }
    throw TransportError(last_error + " (after " + std::to_string(spec_.retries + 1) + " attempts)");
}

GenerationResult RemoteGenerator::decode_or_throw(const std::string& output) const {
    ParseReport report = decode(output);
    if (!report.graph) throw UnparseableError(std::move(report.issues));
    InfluenceGraph graph = *report.graph;
    return {std::move(graph), std::move(report)};
}

GenerationResult RemoteGenerator::generate(const DefeasibleQuery& query, Variant variant) const {
    return decode_or_throw(complete({format_generator_input(query, variant), spec_.max_new_tokens}));
}

GenerationResult RemoteGenerator::correct(const DefeasibleQuery& query, const InfluenceGraph& graph,
                                          std::string_view feedback) const {
    return decode_or_throw(complete({format_training_input(query, feedback, graph), spec_.max_new_tokens}));
}

std::shared_ptr<GraphGenerator> make_generator(const GeneratorSpec& spec, const OracleConfig& cfg) {
    spec.validate();
    switch (spec.kind) {
        case GeneratorKind::Remote: return std::make_shared<RemoteGenerator>(spec);
        case GeneratorKind::Mock: return std::make_shared<MockGenerator>(spec.seed, spec.plant_probability, cfg);
        case GeneratorKind::Repair: return std::make_shared<RepairCorrector>(cfg);
    }
    throw Error("unknown generator kind");
}

}  // namespace defgraph
