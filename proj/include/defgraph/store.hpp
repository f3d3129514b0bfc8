#pragma once

// File-backed append-only store with an in-memory index.
//
// Layout: <dir>/queries.jsonl and <dir>/graphs.jsonl, one JSON record per
// line, fsync'd per append. On open the logs are replayed; for graphs the last
// line for an id wins (reviews append an updated copy). A torn trailing line
// from a crash is skipped and counted.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "defgraph/graph.hpp"
#include "defgraph/oracle.hpp"
#include "defgraph/records.hpp"

namespace defgraph {

enum class GraphSource { GeneratorM, GeneratorMStar, Corrector, HumanAccepted };

std::string_view source_name(GraphSource source) noexcept;
std::optional<GraphSource> parse_source(std::string_view text) noexcept;

struct Review {
    std::string human_feedback;
    bool accepted = false;

    friend bool operator==(const Review&, const Review&) = default;
};

struct StoredGraph {
    std::string id;
    std::string query_id;
    GraphSource source = GraphSource::GeneratorM;
    InfluenceGraph graph;
    Feedback feedback;
    std::int64_t created_at = 0;  // ms since epoch
    std::optional<Review> review;
    std::string parent_id;  // graph this one was derived from, if any

    friend bool operator==(const StoredGraph&, const StoredGraph&) = default;
};

json to_json(const StoredGraph& record);
StoredGraph stored_graph_from_json(const json& j);

struct GraphFilter {
    std::optional<Domain> domain;
    std::optional<GraphSource> source;
    std::optional<bool> flagged;
    std::optional<std::string> query_id;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Stable hex digest of a query's content (not its id).
std::string content_hash(const DefeasibleQuery& query);

class Store {
public:
    explicit Store(std::filesystem::path dir);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// False when a query with identical content already exists. A query
    /// without an id gets "q-<content hash>". Throws SchemaError when the id
    /// is taken by different content.
    bool put_query(DefeasibleQuery query);
    std::optional<DefeasibleQuery> find_query(const std::string& id) const;
    DefeasibleQuery get_query(const std::string& id) const;
    std::vector<DefeasibleQuery> queries() const;

    /// Assigns id and timestamp, persists, returns the stored record.
    StoredGraph add_graph(std::string query_id, GraphSource source, InfluenceGraph graph, Feedback feedback,
                          std::string parent_id = {});
    struct NewGraph {
        GraphSource source;
        InfluenceGraph graph;
        Feedback feedback;
    };
    /// Persists `chain` in one write; each record's parent is the previous
    /// one, the first record's parent is `parent_id`.
    std::vector<StoredGraph> add_graph_chain(std::string query_id, std::vector<NewGraph> chain,
                                             std::string parent_id = {});
    /// Persists a fully formed record. Throws Error if the id exists.
    void append(const StoredGraph& record);

    struct ReviewOutcome {
        StoredGraph reviewed;
        std::optional<StoredGraph> accepted;  // new HumanAccepted copy when accepted
    };
    ReviewOutcome review(const std::string& graph_id, Review review);

    StoredGraph get(const std::string& id) const;
    std::vector<StoredGraph> list(const GraphFilter& filter = {}) const;

    std::size_t skipped_lines() const noexcept { return skipped_lines_; }

private:
    class AppendLog;

    void load();
    void write_graphs_locked(const std::vector<const StoredGraph*>& records);
    std::string next_id_locked();

    std::filesystem::path dir_;
    std::unique_ptr<AppendLog> query_log_;
    std::unique_ptr<AppendLog> graph_log_;

    mutable std::shared_mutex mutex_;
    std::vector<DefeasibleQuery> queries_;
    std::map<std::string, std::size_t> query_by_id_;
    std::map<std::string, std::string> query_by_hash_;
    std::vector<std::string> graph_order_;
    std::map<std::string, StoredGraph> graphs_;
    std::uint64_t next_seq_ = 1;
    std::size_t skipped_lines_ = 0;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

enum class IngestFormat { Jsonl, Csv };

std::optional<IngestFormat> parse_ingest_format(std::string_view text) noexcept;

struct LineError {
    std::size_t line = 0;
    std::string message;
};

struct IngestResult {
    std::size_t added = 0;
    std::size_t duplicates = 0;
    std::vector<LineError> errors;
};

/// Malformed records are collected in `errors`, never fatal. Records without
/// a domain take `domain`. Throws IoError when the file cannot be read.
IngestResult ingest_queries(Store& store, const std::filesystem::path& path, IngestFormat format, Domain domain);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
/// Each row carries the 1-based line number it started on.
struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};
std::vector<CsvRow> parse_csv(std::string_view text);

}  // namespace defgraph
