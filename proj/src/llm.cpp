#include "csqe/llm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "csqe/hash.hpp"
#include "csqe/log.hpp"

namespace csqe {
namespace {

std::string format_temperature(double t) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, t);
    return std::string(buf, res.ptr);
}

void append_field(std::string& out, std::string_view field) {
    out += std::to_string(field.size());
    out.push_back(':');
    out.append(field);
    out.push_back(';');
}

std::string fixture_key(const std::string& hash, std::size_t ordinal) {
    return hash + "/" + std::to_string(ordinal);
}

}  // namespace

void GenerationRequest::validate() const {
    if (prompt.empty()) throw ConfigError("generation prompt must be non-empty");
    if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
    if (!std::isfinite(temperature) || temperature < 0.0)
        throw ConfigError("temperature must be finite and nonnegative");
}

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt); }

std::string sample_fingerprint(std::string_view model_id, std::string_view prompt, double temperature,
                               std::size_t ordinal) {
    std::string key = "csqe-sample-v1;";
    append_field(key, model_id);
    append_field(key, prompt);
    append_field(key, format_temperature(temperature));
    append_field(key, std::to_string(ordinal));
    return sha256_hex(key);
}

std::string request_fingerprint(const GenerationRequest& req) {
    std::string key = "csqe-request-v1;";
    append_field(key, req.model_id);
    append_field(key, req.prompt);
    append_field(key, format_temperature(req.temperature));
    return sha256_hex(key);
}

GenerationBatch generate(Backend& backend, const GenerationRequest& req) {
    req.validate();
    GenerationBatch batch;
    batch.texts = backend.generate(req);
    if (batch.texts.size() != req.n_samples)
        throw BackendError("backend returned " + std::to_string(batch.texts.size()) + " samples, expected " +
                               std::to_string(req.n_samples),
                           0, false);
    batch.request_fingerprint = request_fingerprint(req);
    for (std::size_t i = 0; i < req.n_samples; ++i)
        batch.sample_fingerprints.push_back(sample_fingerprint(req.model_id, req.prompt, req.temperature, i));
    return batch;
}

// ---------------------------------------------------------------------------
// Mock backend

MockBackend::MockBackend(std::map<std::string, std::string> fixtures) : fixtures_(std::move(fixtures)) {}

MockBackend MockBackend::from_json(std::string_view json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("malformed mock fixture JSON: ") + e.what());
    }
    if (!doc.is_object()) throw DataError("mock fixtures must be a JSON object");
    std::map<std::string, std::string> fixtures;
    for (auto& [key, value] : doc.items()) {
        if (!value.is_string()) throw DataError("mock fixture \"" + key + "\" is not a string");
        auto slash = key.rfind('/');
        if (slash == std::string::npos || slash + 1 == key.size())
            throw DataError("mock fixture key \"" + key + "\" is not <hash>/<ordinal>");
        fixtures.emplace(key, value.get<std::string>());
    }
    return MockBackend(std::move(fixtures));
}

MockBackend MockBackend::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open mock fixtures " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void MockBackend::add(std::string_view prompt, std::size_t ordinal, std::string text) {
    add_by_hash(prompt_hash(prompt), ordinal, std::move(text));
}

void MockBackend::add_by_hash(const std::string& hash, std::size_t ordinal, std::string text) {
    fixtures_[fixture_key(hash, ordinal)] = std::move(text);
}

std::string MockBackend::to_json() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [k, v] : fixtures_) doc[k] = v;
    return doc.dump(2) + "\n";
}

std::string MockBackend::identity() const {
    return "mock:" + sha256_hex(nlohmann::json(fixtures_).dump());
}

const std::string& MockBackend::lookup(const std::string& hash, std::size_t ordinal) const {
    auto it = fixtures_.find(fixture_key(hash, ordinal));
    if (it == fixtures_.end()) throw FixtureMissError(hash, ordinal);
    return it->second;
}

std::vector<std::string> MockBackend::generate(const GenerationRequest& req) {
    count_call();
    auto hash = prompt_hash(req.prompt);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < req.n_samples; ++i) out.push_back(lookup(hash, i));
    return out;
}

std::string MockBackend::generate_sample(const GenerationRequest& req, std::size_t ordinal) {
    count_call();
    return lookup(prompt_hash(req.prompt), ordinal);
}

// ---------------------------------------------------------------------------
// Cache

namespace {
constexpr std::string_view kCacheHeader = "csqe-cache-v1 sha256=";
}

GenerationCache::GenerationCache(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw ConfigError("cannot create cache directory " + root_.string() + ": " + ec.message());
}

std::filesystem::path GenerationCache::entry_path(const std::string& fingerprint) const {
    return root_ / fingerprint.substr(0, 2) / (fingerprint + ".txt");
}

std::mutex& GenerationCache::stripe(const std::string& fingerprint) const {
    return stripes_[std::hash<std::string>{}(fingerprint) % stripes_.size()];
}

namespace {

// nullopt when the file is missing; throws DataError when it fails the check.
std::optional<std::string> read_entry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    std::string raw = ss.str();
    auto nl = raw.find('\n');
    if (nl == std::string::npos || raw.compare(0, kCacheHeader.size(), kCacheHeader) != 0)
        throw DataError("missing checksum header");
    std::string expected = raw.substr(kCacheHeader.size(), nl - kCacheHeader.size());
    std::string text = raw.substr(nl + 1);
    if (sha256_hex(text) != expected) throw DataError("checksum mismatch");
    return text;
}

}  // namespace

std::optional<std::string> GenerationCache::lookup(const std::string& fingerprint) const {
    auto path = entry_path(fingerprint);
    try {
        return read_entry(path);
    } catch (const DataError& e) {
        log::warn("ignoring corrupt cache entry {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

void GenerationCache::store(const std::string& fingerprint, std::string_view text) {
    std::lock_guard<std::mutex> lock(stripe(fingerprint));
    auto path = entry_path(fingerprint);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += "." + std::to_string(::getpid()) + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write cache entry " + tmp.string());
        out << kCacheHeader << sha256_hex(text) << '\n';
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw ConfigError("failed writing cache entry " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

CacheStats GenerationCache::stats() const {
    CacheStats s;
    if (!std::filesystem::exists(root_)) return s;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        ++s.entries;
        s.bytes += entry.file_size();
        try {
            read_entry(entry.path());
        } catch (const DataError&) {
            ++s.corrupt;
        }
    }
    return s;
}

std::size_t GenerationCache::clear() {
    std::size_t removed = 0;
    if (!std::filesystem::exists(root_)) return 0;
    std::vector<std::filesystem::path> victims;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension();
        if (ext == ".txt" || ext == ".tmp") victims.push_back(entry.path());
    }
    for (const auto& p : victims) {
        if (p.extension() == ".txt") ++removed;
        std::filesystem::remove(p);
    }
    return removed;
}

GenerationBatch cached_generate(GenerationCache& cache, Backend& backend, const GenerationRequest& req) {
    req.validate();
    GenerationBatch batch;
    batch.request_fingerprint = request_fingerprint(req);
    batch.texts.resize(req.n_samples);

    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < req.n_samples; ++i) {
        batch.sample_fingerprints.push_back(sample_fingerprint(req.model_id, req.prompt, req.temperature, i));
        if (auto hit = cache.lookup(batch.sample_fingerprints.back())) {
            batch.texts[i] = std::move(*hit);
        } else {
            missing.push_back(i);
        }
    }
    if (missing.empty()) return batch;

    if (missing.size() == req.n_samples) {
        auto texts = backend.generate(req);
        if (texts.size() != req.n_samples)
            throw BackendError("backend returned " + std::to_string(texts.size()) + " samples, expected " +
                                   std::to_string(req.n_samples),
                               0, false);
        for (std::size_t i = 0; i < req.n_samples; ++i) batch.texts[i] = std::move(texts[i]);
    } else {
        for (auto i : missing) batch.texts[i] = backend.generate_sample(req, i);
    }
    for (auto i : missing) cache.store(batch.sample_fingerprints[i], batch.texts[i]);
    log::debug("generation cache: {} hit(s), {} miss(es)", req.n_samples - missing.size(), missing.size());
    return batch;
}

}  // namespace csqe
