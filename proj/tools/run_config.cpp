#include "run_config.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include <fmt/format.h>

#include "csqe/error.hpp"
#include "csqe/hash.hpp"

namespace csqe::cli {
namespace {

nlohmann::json input_entry(const std::string& path) {
    if (path.empty()) return nullptr;
    return {{"path", path}, {"sha256", sha256_file(path)}};
}

template <typename T>
void read_field(const nlohmann::json& config, const char* key, T& out) {
    auto it = config.find(key);
    if (it == config.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest field \"") + key + "\": " + e.what());
    }
}

template <typename T>
void read_field(const nlohmann::json& config, const char* key, std::optional<T>& out) {
    auto it = config.find(key);
    if (it == config.end() || it->is_null()) return;
    T value{};
    read_field(config, key, value);
    out = value;
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json options_to_json(const RunOptions& o) {
    return {
        {"method", o.method},
        {"index", o.index_path},
        {"queries", o.queries_path},
        {"tag", o.tag},
        {"topk", o.topk},
        {"k1", opt(o.k1)},
        {"b", opt(o.b)},
        {"fb_docs", o.fb_docs},
        {"fb_terms", o.fb_terms},
        {"orig_weight", o.orig_weight},
        {"k_feedback", o.k_feedback},
        {"doc_tokens", o.doc_tokens},
        {"n_keqe", o.resolved_n_keqe()},
        {"n_csqe", o.n_csqe},
        {"temperature", o.temperature},
        {"model", o.model},
        {"backend", o.backend},
        {"endpoint", o.endpoint},
        {"mock_fixtures", o.mock_fixtures},
        {"cache_dir", o.cache_dir},
        {"max_retries", o.max_retries},
        {"timeout_s", o.timeout_s},
    };
}

void options_from_json(const nlohmann::json& c, RunOptions& o) {
    if (!c.is_object()) throw DataError("manifest \"config\" must be an object");
    read_field(c, "method", o.method);
    read_field(c, "index", o.index_path);
    read_field(c, "queries", o.queries_path);
    read_field(c, "tag", o.tag);
    read_field(c, "topk", o.topk);
    read_field(c, "k1", o.k1);
    read_field(c, "b", o.b);
    read_field(c, "fb_docs", o.fb_docs);
    read_field(c, "fb_terms", o.fb_terms);
    read_field(c, "orig_weight", o.orig_weight);
    read_field(c, "k_feedback", o.k_feedback);
    read_field(c, "doc_tokens", o.doc_tokens);
    read_field(c, "n_keqe", o.n_keqe);
    read_field(c, "n_csqe", o.n_csqe);
    read_field(c, "temperature", o.temperature);
    read_field(c, "model", o.model);
    read_field(c, "backend", o.backend);
    read_field(c, "endpoint", o.endpoint);
    read_field(c, "mock_fixtures", o.mock_fixtures);
    read_field(c, "cache_dir", o.cache_dir);
    read_field(c, "max_retries", o.max_retries);
    read_field(c, "timeout_s", o.timeout_s);
}

nlohmann::json make_manifest(const RunOptions& opts, const std::string& backend_identity) {
    const bool uses_llm = opts.method == "keqe" || opts.method == "csqe";
    nlohmann::json inputs = {
        {"index", input_entry(opts.index_path)},
        {"queries", input_entry(opts.queries_path)},
    };
    if (uses_llm && opts.backend == "mock") inputs["mock_fixtures"] = input_entry(opts.mock_fixtures);

    return {
        {"tool", fmt::format("csqe {}", CSQE_VERSION)},
        {"method", opts.method},
        {"config", options_to_json(opts)},
        {"inputs", inputs},
        {"backend", uses_llm ? nlohmann::json(backend_identity) : nlohmann::json(nullptr)},
        {"timestamp", manifest_timestamp(!uses_llm || opts.backend == "mock")},
    };
}

std::string manifest_timestamp(bool deterministic) {
    std::time_t t = 0;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else if (!deterministic) {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace csqe::cli
