#include "defgraph/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

namespace defgraph {

namespace {

constexpr std::array<std::string_view, kRoleCount> kRoleNames{"C-", "C+", "S", "S-", "M-", "M+", "H+", "H-"};

constexpr std::array<Edge, 10> kEdgeTemplate{{
    {NodeRole::CPlus, NodeRole::S, Polarity::Helps},
    {NodeRole::CMinus, NodeRole::S, Polarity::Hurts},
    {NodeRole::S, NodeRole::MPlus, Polarity::Helps},
    {NodeRole::S, NodeRole::MMinus, Polarity::Hurts},
    {NodeRole::SMinus, NodeRole::MPlus, Polarity::Hurts},
    {NodeRole::SMinus, NodeRole::MMinus, Polarity::Helps},
    {NodeRole::MPlus, NodeRole::HPlus, Polarity::Helps},
    {NodeRole::MPlus, NodeRole::HMinus, Polarity::Hurts},
    {NodeRole::MMinus, NodeRole::HPlus, Polarity::Hurts},
    {NodeRole::MMinus, NodeRole::HMinus, Polarity::Helps},
}};

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool blank(std::string_view text) noexcept { return std::all_of(text.begin(), text.end(), is_space); }

std::string message_for(GraphError::Kind kind, NodeRole role) {
    const char* what = kind == GraphError::Kind::MissingRole ? "missing role " : "empty label for role ";
    return what + std::string(role_name(role));
}

}  // namespace

std::string_view role_name(NodeRole role) noexcept { return kRoleNames[role_index(role)]; }

std::optional<NodeRole> parse_role(std::string_view text) noexcept {
    for (NodeRole role : kAllRoles) {
        if (kRoleNames[role_index(role)] == text) return role;
    }
    return std::nullopt;
}

std::string_view label_name(InferenceLabel label) noexcept {
    return label == InferenceLabel::Strengthener ? "strengthener" : "weakener";
}

std::optional<InferenceLabel> parse_label(std::string_view text) noexcept {
    if (text == "strengthener" || text == "Strengthener" || text == "STRENGTHENER") return InferenceLabel::Strengthener;
    if (text == "weakener" || text == "Weakener" || text == "WEAKENER") return InferenceLabel::Weakener;
    return std::nullopt;
}

std::string_view domain_name(Domain domain) noexcept {
    switch (domain) {
        case Domain::Atomic: return "atomic";
        case Domain::Snli: return "snli";
        case Domain::Social: return "social";
    }
    return "atomic";
}

std::optional<Domain> parse_domain(std::string_view text) noexcept {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "atomic") return Domain::Atomic;
    if (lower == "snli") return Domain::Snli;
    if (lower == "social" || lower == "social-chem" || lower == "socialchem") return Domain::Social;
    return std::nullopt;
}

void validate(const DefeasibleQuery& query) {
    if (blank(query.premise)) throw InvalidQuery("query '" + query.id + "': empty premise");
    if (blank(query.hypothesis)) throw InvalidQuery("query '" + query.id + "': empty hypothesis");
    if (blank(query.update)) throw InvalidQuery("query '" + query.id + "': empty update");
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

GraphError::GraphError(Kind kind, NodeRole role) : Error(message_for(kind, role)), kind_(kind), role_(role) {}

InfluenceGraph InfluenceGraph::create(const std::map<NodeRole, std::string>& labels) {
    Labels out;
    for (NodeRole role : kAllRoles) {
        auto it = labels.find(role);
        if (it == labels.end()) throw GraphError(GraphError::Kind::MissingRole, role);
        out[role_index(role)] = it->second;
    }
    return from_labels(std::move(out));
}

InfluenceGraph InfluenceGraph::from_labels(Labels labels) {
    for (NodeRole role : kAllRoles) {
        auto& label = labels[role_index(role)];
        label = normalize_whitespace(label);
        if (label.empty()) throw GraphError(GraphError::Kind::EmptyLabel, role);
    }
    return InfluenceGraph(std::move(labels));
}

InfluenceGraph InfluenceGraph::with_node(NodeRole role, std::string_view text) const {
    std::string label = normalize_whitespace(text);
    if (label.empty()) throw GraphError(GraphError::Kind::EmptyLabel, role);
    Labels copy = labels_;
    copy[role_index(role)] = std::move(label);
    return InfluenceGraph(std::move(copy));
}

std::string_view polarity_name(Polarity polarity) noexcept {
    return polarity == Polarity::Helps ? "helps" : "hurts";
}

std::span<const Edge> edge_template() noexcept { return kEdgeTemplate; }

std::vector<NodeRole> topological_order(std::span<const Edge> edges) {
    std::array<int, kRoleCount> indegree{};
    for (const Edge& e : edges) ++indegree[role_index(e.target)];

    std::deque<NodeRole> ready;
    for (NodeRole role : kAllRoles) {
        if (indegree[role_index(role)] == 0) ready.push_back(role);
    }

    std::vector<NodeRole> order;
    order.reserve(kRoleCount);
    while (!ready.empty()) {
        NodeRole next = ready.front();
        ready.pop_front();
        order.push_back(next);
        for (const Edge& e : edges) {
            if (e.source == next && --indegree[role_index(e.target)] == 0) ready.push_back(e.target);
        }
    }
    if (order.size() != kRoleCount) throw Error("edge list contains a cycle");
    return order;
}

}  // namespace defgraph
