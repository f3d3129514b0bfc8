#include "defgraph/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "defgraph/codec.hpp"

namespace defgraph {

namespace {

constexpr std::array<std::string_view, 4> kSourceNames{"GeneratorM", "GeneratorMStar", "Corrector", "HumanAccepted"};

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string errno_text() { return std::strerror(errno); }

template <typename Fn>
std::size_t replay(const std::filesystem::path& path, Fn&& apply) {
    std::ifstream in(path);
    if (!in) return 0;
    std::size_t skipped = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            ++skipped;
            continue;
        }
        try {
            apply(j);
        } catch (const Error&) {
            ++skipped;
        } catch (const json::exception&) {
            ++skipped;
        }
    }
    return skipped;
}

}  // namespace

// One fsync'd append-only JSONL file. A failed write is rolled back by
// truncating to the previous size so the log never holds a partial record
// written by this process.
class Store::AppendLog {
public:
    explicit AppendLog(const std::filesystem::path& path) : path_(path) {
        fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw IoError("cannot open " + path.string() + ": " + errno_text());
        // Terminate a torn final line left by a crash so new records start clean.
        struct stat st {};
        if (::fstat(fd_, &st) == 0 && st.st_size > 0) {
            std::ifstream in(path, std::ios::binary);
            in.seekg(st.st_size - 1);
            char last = '\n';
            in.get(last);
            if (last != '\n') append_raw("\n");
        }
    }
    ~AppendLog() {
        if (fd_ >= 0) ::close(fd_);
    }
    AppendLog(const AppendLog&) = delete;
    AppendLog& operator=(const AppendLog&) = delete;

    void append(const json& record) { append_raw(record.dump() + "\n"); }

    /// All records land in one write, or none do.
    void append(const std::vector<json>& records) {
        std::string bytes;
        for (const auto& r : records) bytes += r.dump() + "\n";
        append_raw(bytes);
    }

private:
    void append_raw(const std::string& bytes) {
        const off_t before = ::lseek(fd_, 0, SEEK_END);
        std::size_t written = 0;
        while (written < bytes.size()) {
            const ssize_t n = ::write(fd_, bytes.data() + written, bytes.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                std::string reason = errno_text();
                if (before >= 0 && ::ftruncate(fd_, before) != 0) reason += "; rollback failed: " + errno_text();
                throw IoError("write to " + path_.string() + " failed: " + reason);
            }
            written += static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0) throw IoError("fsync of " + path_.string() + " failed: " + errno_text());
    }

    std::filesystem::path path_;
    int fd_ = -1;
};

std::string_view source_name(GraphSource source) noexcept { return kSourceNames[static_cast<std::size_t>(source)]; }

std::optional<GraphSource> parse_source(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
        if (kSourceNames[i] == text) return static_cast<GraphSource>(i);
    }
    return std::nullopt;
}

json to_json(const StoredGraph& r) {
    json out = {{"id", r.id},
                {"query_id", r.query_id},
                {"source", std::string(source_name(r.source))},
                {"graph", encode(r.graph)},
                {"nodes", nodes_to_json(r.graph)},
                {"feedback", to_json(r.feedback)},
                {"created_at", r.created_at},
                {"review", nullptr}};
    if (r.review) out["review"] = {{"human_feedback", r.review->human_feedback}, {"accepted", r.review->accepted}};
    if (!r.parent_id.empty()) out["parent_id"] = r.parent_id;
    return out;
}

StoredGraph stored_graph_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("graph record is not an object");
    auto source = parse_source(j.at("source").get<std::string>());
    if (!source) throw SchemaError("unknown graph source");
    StoredGraph r{.id = j.at("id").get<std::string>(),
                  .query_id = j.at("query_id").get<std::string>(),
                  .source = *source,
                  .graph = graph_from_json(j.at("graph")),
                  .feedback = feedback_from_json(j.at("feedback")),
                  .created_at = j.value("created_at", std::int64_t{0}),
                  .review = std::nullopt,
                  .parent_id = j.value("parent_id", std::string{})};
    if (j.contains("review") && j["review"].is_object()) {
        r.review = Review{j["review"].value("human_feedback", std::string{}), j["review"].value("accepted", false)};
    }
    if (r.source == GraphSource::HumanAccepted && !(r.review && r.review->accepted)) {
        throw SchemaError("HumanAccepted record without an accepted review");
    }
    return r;
}

std::string content_hash(const DefeasibleQuery& q) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    mix(q.premise);
    mix(q.hypothesis);
    mix(q.update);
    mix(q.label ? label_name(*q.label) : "");
    mix(domain_name(q.domain));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Store::Store(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create store directory " + dir_.string() + ": " + ec.message());
    load();
    query_log_ = std::make_unique<AppendLog>(dir_ / "queries.jsonl");
    graph_log_ = std::make_unique<AppendLog>(dir_ / "graphs.jsonl");
}

Store::~Store() = default;

void Store::load() {
    skipped_lines_ += replay(dir_ / "queries.jsonl", [this](const json& j) {
        DefeasibleQuery q = query_from_json(j);
        if (q.id.empty() || query_by_id_.count(q.id) != 0) throw SchemaError("bad or duplicate query id");
        query_by_hash_.emplace(content_hash(q), q.id);
        query_by_id_.emplace(q.id, queries_.size());
        queries_.push_back(std::move(q));
    });
    skipped_lines_ += replay(dir_ / "graphs.jsonl", [this](const json& j) {
        StoredGraph r = stored_graph_from_json(j);
        if (graphs_.count(r.id) == 0) graph_order_.push_back(r.id);
        if (r.id.rfind("g-", 0) == 0) {
            try {
                next_seq_ = std::max<std::uint64_t>(next_seq_, std::stoull(r.id.substr(2)) + 1);
            } catch (const std::exception&) {
            }
        }
        graphs_.insert_or_assign(r.id, std::move(r));
    });
}

bool Store::put_query(DefeasibleQuery query) {
    validate(query);
    const std::string hash = content_hash(query);
    std::unique_lock lock(mutex_);
    if (query_by_hash_.count(hash) != 0) return false;
    if (query.id.empty()) query.id = "q-" + hash;
    if (query_by_id_.count(query.id) != 0) {
        throw SchemaError("query id '" + query.id + "' already used by different content");
    }
    query_log_->append(to_json(query));
    query_by_hash_.emplace(hash, query.id);
    query_by_id_.emplace(query.id, queries_.size());
    queries_.push_back(std::move(query));
    return true;
}

std::optional<DefeasibleQuery> Store::find_query(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = query_by_id_.find(id);
    if (it == query_by_id_.end()) return std::nullopt;
    return queries_[it->second];
}

DefeasibleQuery Store::get_query(const std::string& id) const {
    auto q = find_query(id);
    if (!q) throw NotFoundError("unknown query id '" + id + "'");
    return *q;
}

std::vector<DefeasibleQuery> Store::queries() const {
    std::shared_lock lock(mutex_);
    return queries_;
}

std::string Store::next_id_locked() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "g-%06llu", static_cast<unsigned long long>(next_seq_));
    return buf;
}

void Store::write_graphs_locked(const std::vector<const StoredGraph*>& records) {
    std::vector<json> lines;
    for (const StoredGraph* r : records) lines.push_back(to_json(*r));
    graph_log_->append(lines);
    for (const StoredGraph* r : records) {
        if (graphs_.count(r->id) == 0) graph_order_.push_back(r->id);
        if (r->id.rfind("g-", 0) == 0) {
            try {
                next_seq_ = std::max<std::uint64_t>(next_seq_, std::stoull(r->id.substr(2)) + 1);
            } catch (const std::exception&) {
            }
        }
        graphs_.insert_or_assign(r->id, *r);
    }
}

StoredGraph Store::add_graph(std::string query_id, GraphSource source, InfluenceGraph graph, Feedback feedback,
                             std::string parent_id) {
    std::vector<NewGraph> one;
    one.push_back({source, std::move(graph), std::move(feedback)});
    return add_graph_chain(std::move(query_id), std::move(one), std::move(parent_id)).front();
}

std::vector<StoredGraph> Store::add_graph_chain(std::string query_id, std::vector<NewGraph> chain,
                                                std::string parent_id) {
    std::unique_lock lock(mutex_);
    if (query_by_id_.count(query_id) == 0) throw NotFoundError("unknown query id '" + query_id + "'");
    std::vector<StoredGraph> records;
    records.reserve(chain.size());
    const std::int64_t stamp = now_ms();
    std::uint64_t seq = next_seq_;
    for (auto& item : chain) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "g-%06llu", static_cast<unsigned long long>(seq++));
        std::string parent = records.empty() ? parent_id : records.back().id;
        records.push_back(StoredGraph{.id = buf,
                                      .query_id = query_id,
                                      .source = item.source,
                                      .graph = std::move(item.graph),
                                      .feedback = std::move(item.feedback),
                                      .created_at = stamp,
                                      .review = std::nullopt,
                                      .parent_id = std::move(parent)});
    }
    std::vector<const StoredGraph*> refs;
    for (const auto& r : records) refs.push_back(&r);
    write_graphs_locked(refs);
    return records;
}

void Store::append(const StoredGraph& record) {
    if (record.id.empty()) throw Error("stored graph needs an id");
    if (record.source == GraphSource::HumanAccepted && !(record.review && record.review->accepted)) {
        throw Error("HumanAccepted record requires an accepted review");
    }
    std::unique_lock lock(mutex_);
    if (graphs_.count(record.id) != 0) throw Error("graph id '" + record.id + "' already exists");
    write_graphs_locked({&record});
}

Store::ReviewOutcome Store::review(const std::string& graph_id, Review review) {
    std::unique_lock lock(mutex_);
    auto it = graphs_.find(graph_id);
    if (it == graphs_.end()) throw NotFoundError("unknown graph id '" + graph_id + "'");

    StoredGraph updated = it->second;
    updated.review = review;
    ReviewOutcome outcome{updated, std::nullopt};
    if (review.accepted) {
        outcome.accepted = StoredGraph{.id = next_id_locked(),
                                       .query_id = updated.query_id,
                                       .source = GraphSource::HumanAccepted,
                                       .graph = updated.graph,
                                       .feedback = updated.feedback,
                                       .created_at = now_ms(),
                                       .review = review,
                                       .parent_id = updated.id};
    }
    if (outcome.accepted) {
        write_graphs_locked({&updated, &*outcome.accepted});
    } else {
        write_graphs_locked({&updated});
    }
    return outcome;
}

StoredGraph Store::get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = graphs_.find(id);
    if (it == graphs_.end()) throw NotFoundError("unknown graph id '" + id + "'");
    return it->second;
}

std::vector<StoredGraph> Store::list(const GraphFilter& filter) const {
    std::shared_lock lock(mutex_);
    std::vector<StoredGraph> out;
    for (const auto& id : graph_order_) {
        const StoredGraph& r = graphs_.at(id);
        if (filter.source && r.source != *filter.source) continue;
        if (filter.query_id && r.query_id != *filter.query_id) continue;
        if (filter.flagged && r.feedback.clean() == *filter.flagged) continue;
        if (filter.domain) {
            auto q = query_by_id_.find(r.query_id);
            if (q == query_by_id_.end() || queries_[q->second].domain != *filter.domain) continue;
        }
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

std::optional<IngestFormat> parse_ingest_format(std::string_view text) noexcept {
    if (text == "jsonl") return IngestFormat::Jsonl;
    if (text == "csv") return IngestFormat::Csv;
    return std::nullopt;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    CsvRow row{1, {}};
    std::string field;
    bool quoted = false;
    bool row_has_content = false;
    std::size_t line = 1;

    auto end_row = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        if (row_has_content || row.fields.size() > 1 || !row.fields.front().empty()) rows.push_back(std::move(row));
        row = CsvRow{line, {}};
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                row_has_content = true;
                break;
            case ',':
                row.fields.push_back(std::move(field));
                field.clear();
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                end_row();
                break;
            default: field.push_back(c);
        }
    }
    if (!field.empty() || !row.fields.empty() || row_has_content) end_row();
    return rows;
}

IngestResult ingest_queries(Store& store, const std::filesystem::path& path, IngestFormat format, Domain domain) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    IngestResult result;
    auto take = [&](std::size_t line, const json& record) {
        try {
            if (store.put_query(query_from_json(record, domain))) {
                ++result.added;
            } else {
                ++result.duplicates;
            }
        } catch (const IoError&) {
            throw;
        } catch (const Error& e) {
            result.errors.push_back({line, e.what()});
        }
    };

    if (format == IngestFormat::Jsonl) {
        std::istringstream lines(content);
        std::string line;
        std::size_t number = 0;
        while (std::getline(lines, line)) {
            ++number;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                result.errors.push_back({number, "invalid JSON"});
                continue;
            }
            take(number, j);
        }
        return result;
    }

    const auto rows = parse_csv(content);
    if (rows.empty()) return result;
    const auto& header = rows.front().fields;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            result.errors.push_back({row.line, "expected " + std::to_string(header.size()) + " fields, got " +
                                                   std::to_string(row.fields.size())});
            continue;
        }
        json record = json::object();
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (row.fields[c].empty() && (header[c] == "label" || header[c] == "domain" || header[c] == "id")) {
                continue;
            }
            record[header[c]] = row.fields[c];
        }
        take(row.line, record);
    }
    return result;
}

}  // namespace defgraph
