#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace defgraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Roles
// ---------------------------------------------------------------------------

/// The eight fixed slots of an influence graph, in canonical order.
enum class NodeRole : std::uint8_t { CMinus, CPlus, S, SMinus, MMinus, MPlus, HPlus, HMinus };

inline constexpr std::size_t kRoleCount = 8;

inline constexpr std::array<NodeRole, kRoleCount> kAllRoles{
    NodeRole::CMinus, NodeRole::CPlus, NodeRole::S,     NodeRole::SMinus,
    NodeRole::MMinus, NodeRole::MPlus, NodeRole::HPlus, NodeRole::HMinus};

constexpr std::size_t role_index(NodeRole role) noexcept { return static_cast<std::size_t>(role); }

/// Display string: "C-", "C+", "S", "S-", "M-", "M+", "H+", "H-".
std::string_view role_name(NodeRole role) noexcept;

/// Inverse of role_name. Anything outside the eight display strings is rejected.
std::optional<NodeRole> parse_role(std::string_view text) noexcept;

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

enum class InferenceLabel : std::uint8_t { Strengthener, Weakener };
enum class Domain : std::uint8_t { Atomic, Snli, Social };

std::string_view label_name(InferenceLabel label) noexcept;  // "strengthener" / "weakener"
std::optional<InferenceLabel> parse_label(std::string_view text) noexcept;
std::string_view domain_name(Domain domain) noexcept;  // "atomic" / "snli" / "social"
std::optional<Domain> parse_domain(std::string_view text) noexcept;

/// One premise/hypothesis/update record with an optional answer.
struct DefeasibleQuery {
    std::string id;
    std::string premise;
    std::string hypothesis;
    std::string update;
    std::optional<InferenceLabel> label;
    Domain domain = Domain::Atomic;

    friend bool operator==(const DefeasibleQuery&, const DefeasibleQuery&) = default;
};

class InvalidQuery : public Error {
public:
    using Error::Error;
};

/// Throws InvalidQuery if premise, hypothesis or update is blank.
void validate(const DefeasibleQuery& query);

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Trim and collapse internal whitespace runs to a single space.
std::string normalize_whitespace(std::string_view text);

class GraphError : public Error {
public:
    enum class Kind { MissingRole, EmptyLabel };

    GraphError(Kind kind, NodeRole role);

    Kind kind() const noexcept { return kind_; }
    NodeRole role() const noexcept { return role_; }

private:
    Kind kind_;
    NodeRole role_;
};

/// Total map from role to (whitespace-normalized, non-empty) label text.
/// Immutable value type; edits return a new graph.
class InfluenceGraph {
public:
    using Labels = std::array<std::string, kRoleCount>;

    /// Throws GraphError(MissingRole) or GraphError(EmptyLabel).
    static InfluenceGraph create(const std::map<NodeRole, std::string>& labels);
    /// Labels indexed by role_index. Throws GraphError(EmptyLabel).
    static InfluenceGraph from_labels(Labels labels);

    const std::string& label(NodeRole role) const noexcept { return labels_[role_index(role)]; }
    const Labels& labels() const noexcept { return labels_; }

    /// Copy with one label replaced. Throws GraphError(EmptyLabel) for blank text.
    InfluenceGraph with_node(NodeRole role, std::string_view text) const;

    friend bool operator==(const InfluenceGraph&, const InfluenceGraph&) = default;

private:
    explicit InfluenceGraph(Labels labels) : labels_(std::move(labels)) {}

    Labels labels_;
};

// ---------------------------------------------------------------------------
// Edge template
// ---------------------------------------------------------------------------

enum class Polarity : std::uint8_t { Helps, Hurts };

std::string_view polarity_name(Polarity polarity) noexcept;  // "helps" / "hurts"

struct Edge {
    NodeRole source;
    NodeRole target;
    Polarity polarity;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// The fixed helps/hurts structure shared by every graph. It is carried for
/// rendering; nothing in the correction method reads it.
std::span<const Edge> edge_template() noexcept;

/// Kahn ordering of the roles under `edges`; throws Error when a cycle exists.
std::vector<NodeRole> topological_order(std::span<const Edge> edges);

}  // namespace defgraph
