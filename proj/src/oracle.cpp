#include "defgraph/oracle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

namespace defgraph {

namespace {

struct Tokenized {
    std::string normalized;
    std::set<std::string> content;  // cues removed
    bool negated = false;
};

bool is_ascii_punct(unsigned char c) noexcept { return c < 0x80 && std::ispunct(c) != 0; }

void emit(std::vector<std::string>& out, std::string token, const OracleConfig& cfg) {
    if (token.empty() || cfg.stopwords.count(token) != 0) return;
    out.push_back(std::move(token));
}

std::string without_apostrophes(std::string_view word) {
    std::string out;
    std::copy_if(word.begin(), word.end(), std::back_inserter(out), [](char c) { return c != '\''; });
    return out;
}

Tokenized tokenize(std::string_view text, const OracleConfig& cfg) {
    Tokenized t;
    t.normalized = normalize_whitespace(text);
    for (auto& token : normalize_tokens(text, cfg)) {
        if (cfg.negation_cues.count(token) != 0) {
            t.negated = true;
        } else {
            t.content.insert(std::move(token));
        }
    }
    return t;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& token : a) shared += b.count(token);
    const std::size_t joined = a.size() + b.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(joined);
}

bool repeats(const Tokenized& a, const Tokenized& b, const OracleConfig& cfg) {
    if (!a.normalized.empty() && a.normalized == b.normalized) return true;
    if (a.negated != b.negated) return false;
    return jaccard(a.content, b.content) >= cfg.overlap_threshold;
}

std::size_t find_root(std::array<std::size_t, kRoleCount>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

}  // namespace

std::set<std::string> default_stopwords() {
    return {"a",    "an",   "the",  "is",    "are",   "was",   "were",  "be",    "been",  "being", "am",
            "of",   "to",   "in",   "on",    "at",    "for",   "with",  "by",    "from",  "as",    "and",
            "or",   "but",  "so",   "that",  "this",  "these", "those", "it",    "its",   "they",  "them",
            "their", "there", "he", "she",   "his",   "her",   "we",    "our",   "you",   "your",  "i",
            "me",   "my",   "will", "would", "can",   "could", "should", "may",  "might", "do",    "does",
            "did",  "has",  "have", "had",   "all",   "some",  "into",  "than",  "then",  "up",    "out",
            "about", "s",   "if",   "also",  "just",  "very"};
}

std::set<std::string> default_negation_cues() { return {"no", "not", "never", "none", "n't", "without", "cannot"}; }

void OracleConfig::validate() const {
    if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0)) {
        throw Error("overlap_threshold must be in (0, 1], got " + std::to_string(overlap_threshold));
    }
    for (const auto& cue : negation_cues) {
        if (stopwords.count(cue) != 0) throw Error("negation cue '" + cue + "' is also a stopword");
    }
}

std::vector<std::string> normalize_tokens(std::string_view text, const OracleConfig& cfg) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == '\'') {
            cleaned.push_back('\'');
        } else if (is_ascii_punct(c) || std::isspace(c) != 0) {
            cleaned.push_back(' ');
        } else if (c < 0x80) {
            cleaned.push_back(static_cast<char>(std::tolower(c)));
        } else {
            cleaned.push_back(ch);
        }
    }

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < cleaned.size()) {
        const std::size_t start = cleaned.find_first_not_of(' ', pos);
        if (start == std::string::npos) break;
        std::size_t end = cleaned.find(' ', start);
        if (end == std::string::npos) end = cleaned.size();
        std::string_view word(cleaned.data() + start, end - start);
        pos = end;

        if (word.size() >= 3 && word.substr(word.size() - 3) == "n't") {
            std::string stem = without_apostrophes(word.substr(0, word.size() - 3));
            if (stem == "ca") stem = "can";
            if (stem == "wo") stem = "will";
            emit(tokens, std::move(stem), cfg);
            emit(tokens, "n't", cfg);
        } else {
            emit(tokens, without_apostrophes(word), cfg);
        }
    }
    return tokens;
}

double overlap_score(const std::vector<std::string>& a, const std::vector<std::string>& b, const OracleConfig& cfg) {
    auto content = [&cfg](const std::vector<std::string>& tokens) {
        std::set<std::string> out;
        for (const auto& t : tokens) {
            if (cfg.negation_cues.count(t) == 0) out.insert(t);
        }
        return out;
    };
    return jaccard(content(a), content(b));
}

bool is_repetition(std::string_view a, std::string_view b, const OracleConfig& cfg) {
    return repeats(tokenize(a, cfg), tokenize(b, cfg), cfg);
}

std::vector<RoleCluster> detect_clusters(const InfluenceGraph& graph, const OracleConfig& cfg) {
    std::array<Tokenized, kRoleCount> nodes;
    for (NodeRole role : kAllRoles) nodes[role_index(role)] = tokenize(graph.label(role), cfg);

    std::array<std::size_t, kRoleCount> parent{};
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t i = 0; i < kRoleCount; ++i) {
        for (std::size_t j = i + 1; j < kRoleCount; ++j) {
            if (repeats(nodes[i], nodes[j], cfg)) parent[find_root(parent, j)] = find_root(parent, i);
        }
    }

    // Iterating roles in canonical order yields clusters sorted by their
    // smallest member and members sorted within each cluster.
    std::array<int, kRoleCount> slot;
    slot.fill(-1);
    std::vector<RoleCluster> components;
    for (NodeRole role : kAllRoles) {
        const std::size_t root = find_root(parent, role_index(role));
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(components.size());
            components.emplace_back();
        }
        components[static_cast<std::size_t>(slot[root])].push_back(role);
    }
    std::erase_if(components, [](const RoleCluster& c) { return c.size() < 2; });
    return components;
}

Feedback render_feedback(std::vector<RoleCluster> clusters) {
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end(),
              [](const RoleCluster& a, const RoleCluster& b) { return a.front() < b.front(); });

    Feedback fb;
    fb.clusters = std::move(clusters);
    if (fb.clusters.empty()) return fb;

    fb.rendered.clear();
    for (std::size_t i = 0; i < fb.clusters.size(); ++i) {
        if (i > 0) fb.rendered += ", and ";
        const auto& cluster = fb.clusters[i];
        for (std::size_t j = 0; j < cluster.size(); ++j) {
            if (j > 0) fb.rendered += ", ";
            fb.rendered += role_name(cluster[j]);
        }
        fb.rendered += " are overlapping";
    }
    fb.rendered += ".";
    return fb;
}

Feedback run_oracle(const InfluenceGraph& graph, const OracleConfig& cfg) {
    return render_feedback(detect_clusters(graph, cfg));
}

}  // namespace defgraph
