#pragma once

// Rule-based feedback: flags nodes that repeat each other's content by token
// overlap, with a guard against matching a statement with its negation, and
// renders the result in the "<roles> are overlapping." form.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "defgraph/graph.hpp"

namespace defgraph {

inline constexpr std::string_view kCleanFeedback = "No issues, looks good.";

enum class ComparePairs { AllPairs };

std::set<std::string> default_stopwords();
std::set<std::string> default_negation_cues();

struct OracleConfig {
    double overlap_threshold = 0.8;
    std::set<std::string> stopwords = default_stopwords();
    std::set<std::string> negation_cues = default_negation_cues();
    ComparePairs compare_pairs = ComparePairs::AllPairs;

    /// Throws Error unless 0 < threshold <= 1 and cues and stopwords are disjoint.
    void validate() const;
};

/// Roles in canonical order, size >= 2.
using RoleCluster = std::vector<NodeRole>;

struct Feedback {
    std::vector<RoleCluster> clusters;
    std::string rendered{kCleanFeedback};

    bool clean() const noexcept { return clusters.empty(); }
    friend bool operator==(const Feedback&, const Feedback&) = default;
};

/// Lowercase, punctuation to token breaks, stopwords dropped. "n't" is split
/// off contractions so it survives as a negation cue.
std::vector<std::string> normalize_tokens(std::string_view text, const OracleConfig& cfg);

/// Jaccard similarity of the token sets with negation cues removed; 0 if both empty.
double overlap_score(const std::vector<std::string>& a, const std::vector<std::string>& b, const OracleConfig& cfg);

bool is_repetition(std::string_view a, std::string_view b, const OracleConfig& cfg);

/// Connected components (size >= 2) of the pairwise repetition relation.
std::vector<RoleCluster> detect_clusters(const InfluenceGraph& graph, const OracleConfig& cfg);

Feedback render_feedback(std::vector<RoleCluster> clusters);

/// detect_clusters followed by render_feedback.
Feedback run_oracle(const InfluenceGraph& graph, const OracleConfig& cfg);

}  // namespace defgraph
