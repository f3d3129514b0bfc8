#pragma once

// Text serialization of influence graphs.
//
// Wire form: `C-: <label> | C+: <label> | S: <label> | ... | H-: <label>`,
// roles in canonical order. Inside a label `|` is written `\|` and `\` is
// written `\\`. The decoder accepts any role order and salvages what it can
// from malformed generator output.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defgraph/graph.hpp"

namespace defgraph {

enum class IssueKind { UnknownRole, DuplicateRole, MissingRole, EmptyLabel, Syntax };

std::string_view issue_kind_name(IssueKind kind) noexcept;

struct ParseIssue {
    std::size_t position = 0;  // byte offset of the offending segment
    IssueKind kind = IssueKind::Syntax;
    std::optional<NodeRole> role;
    std::string message;
};

struct ParseReport {
    std::optional<InfluenceGraph> graph;
    std::vector<ParseIssue> issues;

    bool clean() const noexcept { return graph.has_value() && issues.empty(); }
    std::size_t count(IssueKind kind) const noexcept;
};

class UnparseableError : public Error {
public:
    explicit UnparseableError(std::vector<ParseIssue> issues);

    const std::vector<ParseIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ParseIssue> issues_;
};

std::string encode(const InfluenceGraph& graph);

/// Total: never throws on any input. First occurrence wins for duplicate roles.
ParseReport decode(std::string_view text);

/// decode + encode. Throws UnparseableError when no graph could be recovered.
std::string canonicalize(std::string_view text);

}  // namespace defgraph
