#include "defgraph/codec.hpp"

#include <algorithm>
#include <array>

namespace defgraph {

namespace {

constexpr std::string_view kSeparator = " | ";

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view text) noexcept {
    while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
    return text;
}

void escape_into(std::string& out, std::string_view label) {
    for (char c : label) {
        if (c == '|' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
}

std::string unescape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 1 < raw.size() && (raw[i + 1] == '|' || raw[i + 1] == '\\')) {
            out.push_back(raw[++i]);
        } else {
            out.push_back(raw[i]);
        }
    }
    return out;
}

struct Segment {
    std::size_t offset;
    std::string_view text;
};

// Split on `|` not preceded by an escaping backslash.
std::vector<Segment> split_segments(std::string_view text) {
    std::vector<Segment> segments;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\\') {
            ++i;
        } else if (text[i] == '|') {
            segments.push_back({start, text.substr(start, i - start)});
            start = i + 1;
        }
    }
    segments.push_back({start, text.substr(start)});
    return segments;
}

std::string describe(std::string_view what, std::string_view snippet) {
    constexpr std::size_t kMaxSnippet = 40;
    std::string out(what);
    out += ": '";
    out += snippet.substr(0, kMaxSnippet);
    if (snippet.size() > kMaxSnippet) out += "...";
    out += "'";
    return out;
}

}  // namespace

std::string_view issue_kind_name(IssueKind kind) noexcept {
    switch (kind) {
        case IssueKind::UnknownRole: return "UnknownRole";
        case IssueKind::DuplicateRole: return "DuplicateRole";
        case IssueKind::MissingRole: return "MissingRole";
        case IssueKind::EmptyLabel: return "EmptyLabel";
        case IssueKind::Syntax: return "Syntax";
    }
    return "Syntax";
}

std::size_t ParseReport::count(IssueKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [kind](const ParseIssue& i) { return i.kind == kind; }));
}

UnparseableError::UnparseableError(std::vector<ParseIssue> issues)
    : Error("unparseable graph (" + std::to_string(issues.size()) + " issues)"), issues_(std::move(issues)) {}

std::string encode(const InfluenceGraph& graph) {
    std::string out;
    for (NodeRole role : kAllRoles) {
        if (!out.empty()) out += kSeparator;
        out += role_name(role);
        out += ": ";
        escape_into(out, graph.label(role));
    }
    return out;
}

ParseReport decode(std::string_view text) {
    ParseReport report;
    std::array<std::optional<std::string>, kRoleCount> found;
    std::array<bool, kRoleCount> seen{};

    if (!trim(text).empty()) {
        for (const Segment& seg : split_segments(text)) {
            std::string_view body = trim(seg.text);
            if (body.empty()) {
                report.issues.push_back({seg.offset, IssueKind::Syntax, std::nullopt, "empty segment"});
                continue;
            }
            const std::size_t colon = body.find(':');
            if (colon == std::string_view::npos) {
                report.issues.push_back(
                    {seg.offset, IssueKind::Syntax, std::nullopt, describe("segment without role prefix", body)});
                continue;
            }
            const std::string_view role_text = trim(body.substr(0, colon));
            const auto role = parse_role(role_text);
            if (!role) {
                report.issues.push_back(
                    {seg.offset, IssueKind::UnknownRole, std::nullopt, describe("unknown role", role_text)});
                continue;
            }
            const std::size_t idx = role_index(*role);
            if (seen[idx]) {
                report.issues.push_back({seg.offset, IssueKind::DuplicateRole, role,
                                         "duplicate role " + std::string(role_name(*role)) + "; first occurrence kept"});
                continue;
            }
            seen[idx] = true;
            std::string label = normalize_whitespace(unescape(body.substr(colon + 1)));
            if (label.empty()) {
                report.issues.push_back(
                    {seg.offset, IssueKind::EmptyLabel, role, "empty label for role " + std::string(role_name(*role))});
                continue;
            }
            found[idx] = std::move(label);
        }
    }

    bool complete = true;
    for (NodeRole role : kAllRoles) {
        const std::size_t idx = role_index(role);
        if (found[idx]) continue;
        complete = false;
        if (!seen[idx]) {
            report.issues.push_back(
                {text.size(), IssueKind::MissingRole, role, "missing role " + std::string(role_name(role))});
        }
    }
    if (complete) {
        InfluenceGraph::Labels labels;
        for (std::size_t i = 0; i < kRoleCount; ++i) labels[i] = std::move(*found[i]);
        report.graph = InfluenceGraph::from_labels(std::move(labels));
    }
    return report;
}

std::string canonicalize(std::string_view text) {
    ParseReport report = decode(text);
    if (!report.graph) throw UnparseableError(std::move(report.issues));
    return encode(*report.graph);
}

}  // namespace defgraph
