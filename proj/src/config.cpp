#include "defgraph/config.hpp"

#include <charconv>
#include <fstream>

namespace defgraph {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw Error("config key '" + std::string(key) + "': not a number: '" + std::string(value) + "'");
    }
    return out;
}

std::set<std::string> parse_list(std::string_view value) {
    std::set<std::string> out;
    while (!value.empty()) {
        const auto comma = value.find(',');
        auto item = trim(value.substr(0, comma));
        if (!item.empty()) out.emplace(item);
        if (comma == std::string_view::npos) break;
        value.remove_prefix(comma + 1);
    }
    return out;
}

void apply_generator(GeneratorSpec& spec, std::string_view full_key, std::string_view field, std::string_view value) {
    if (field == "kind") {
        auto kind = parse_generator_kind(value);
        if (!kind) throw Error("config key '" + std::string(full_key) + "': unknown kind '" + std::string(value) + "'");
        spec.kind = *kind;
    } else if (field == "endpoint") {
        spec.endpoint = value;
    } else if (field == "timeout_ms") {
        spec.timeout = std::chrono::milliseconds(parse_number<long long>(full_key, value));
    } else if (field == "retries") {
        spec.retries = parse_number<int>(full_key, value);
    } else if (field == "max_in_flight") {
        spec.max_in_flight = parse_number<int>(full_key, value);
    } else if (field == "max_new_tokens") {
        spec.max_new_tokens = parse_number<int>(full_key, value);
    } else if (field == "seed") {
        spec.seed = parse_number<std::uint64_t>(full_key, value);
    } else if (field == "plant_probability") {
        spec.plant_probability = parse_number<double>(full_key, value);
    } else {
        throw Error("unknown config key '" + std::string(full_key) + "'");
    }
}

}  // namespace

void WorkbenchConfig::validate() const {
    oracle.validate();
    gen_m.validate();
    gen_mstar.validate();
    corrector.validate();
    if (max_iters < 1) throw Error("pipeline.max_iters must be >= 1");
    if (port < 0 || port > 65535) throw Error("service.port out of range");
}

void apply_setting(WorkbenchConfig& cfg, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "oracle.threshold") {
        cfg.oracle.overlap_threshold = parse_number<double>(key, value);
    } else if (key == "oracle.stopwords") {
        cfg.oracle.stopwords = parse_list(value);
    } else if (key == "oracle.negation_cues") {
        cfg.oracle.negation_cues = parse_list(value);
    } else if (key == "store.dir") {
        cfg.store_dir = value;
    } else if (key == "service.host") {
        cfg.host = value;
    } else if (key == "service.port") {
        cfg.port = parse_number<int>(key, value);
    } else if (key == "pipeline.max_iters") {
        cfg.max_iters = parse_number<int>(key, value);
    } else if (const auto dot = key.find('.'); dot != std::string_view::npos) {
        const auto group = key.substr(0, dot);
        const auto field = key.substr(dot + 1);
        if (group == "m") {
            apply_generator(cfg.gen_m, key, field, value);
        } else if (group == "mstar") {
            apply_generator(cfg.gen_mstar, key, field, value);
        } else if (group == "corrector") {
            apply_generator(cfg.corrector, key, field, value);
        } else {
            throw Error("unknown config key '" + std::string(key) + "'");
        }
    } else {
        throw Error("unknown config key '" + std::string(key) + "'");
    }
}

WorkbenchConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path.string());
    WorkbenchConfig cfg;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw Error(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        try {
            apply_setting(cfg, trim(view.substr(0, eq)), view.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return cfg;
}

void apply_env_overrides(WorkbenchConfig& cfg, const std::function<const char*(const char*)>& getenv) {
    auto endpoint = [&getenv](const char* name, GeneratorSpec& spec) {
        if (const char* v = getenv(name); v != nullptr && *v != '\0') {
            spec.kind = GeneratorKind::Remote;
            spec.endpoint = v;
        }
    };
    endpoint("DEFGRAPH_M_ENDPOINT", cfg.gen_m);
    endpoint("DEFGRAPH_MSTAR_ENDPOINT", cfg.gen_mstar);
    endpoint("DEFGRAPH_CORRECTOR_ENDPOINT", cfg.corrector);
    if (const char* v = getenv("DEFGRAPH_PORT"); v != nullptr && *v != '\0') {
        cfg.port = parse_number<int>("DEFGRAPH_PORT", v);
    }
    if (const char* v = getenv("DEFGRAPH_STORE"); v != nullptr && *v != '\0') cfg.store_dir = v;
}

}  // namespace defgraph
