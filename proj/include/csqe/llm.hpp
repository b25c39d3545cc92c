#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csqe/error.hpp"

namespace csqe {

struct GenerationRequest {
    std::string prompt;
    double temperature = 1.0;
    std::size_t n_samples = 1;
    std::string model_id;

    /// Throws ConfigError on an empty prompt, zero samples or a negative or
    /// non-finite temperature.
    void validate() const;
};

struct GenerationBatch {
    std::vector<std::string> texts;
    /// Hash of (model_id, prompt, temperature).
    std::string request_fingerprint;
    /// One per sample: hash of (model_id, prompt, temperature, ordinal).
    std::vector<std::string> sample_fingerprints;
};

/// SHA-256 of the prompt bytes. Mock fixtures are keyed by this.
std::string prompt_hash(std::string_view prompt);

/// Cache key of one sample. Fields are length-prefixed before hashing so
/// distinct tuples never serialize to the same bytes.
std::string sample_fingerprint(std::string_view model_id, std::string_view prompt, double temperature,
                               std::size_t ordinal);

std::string request_fingerprint(const GenerationRequest& req);

/// Raised by the mock backend when no fixture exists for a prompt/ordinal.
class FixtureMissError : public ConfigError {
public:
    FixtureMissError(const std::string& hash, std::size_t ordinal)
        : ConfigError("no mock fixture for prompt hash " + hash + " ordinal " + std::to_string(ordinal)),
          hash_(hash) {}
    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

/// A text generator. Implementations must be safe for concurrent calls.
class Backend {
public:
    Backend() = default;
    // Copies start with a fresh call counter.
    Backend(const Backend&) noexcept {}
    Backend& operator=(const Backend&) noexcept { return *this; }
    virtual ~Backend() = default;

    /// Short description recorded in run manifests.
    virtual std::string identity() const = 0;

    /// All `n_samples` completions for the request, in sample order.
    virtual std::vector<std::string> generate(const GenerationRequest& req) = 0;

    /// One completion for the given sample ordinal.
    virtual std::string generate_sample(const GenerationRequest& req, std::size_t ordinal) = 0;

    /// Number of generate/generate_sample calls served so far.
    std::size_t calls() const noexcept { return calls_.load(); }

protected:
    void count_call() noexcept { calls_.fetch_add(1); }

private:
    std::atomic<std::size_t> calls_{0};
};

/// Replays fixture texts keyed by (prompt hash, sample ordinal). Temperature
/// and model id are ignored.
class MockBackend final : public Backend {
public:
    MockBackend() = default;
    explicit MockBackend(std::map<std::string, std::string> fixtures);

    /// JSON object mapping "<prompt hash>/<ordinal>" to completion text.
    static MockBackend from_json(std::string_view json);
    static MockBackend from_file(const std::string& path);

    void add(std::string_view prompt, std::size_t ordinal, std::string text);
    void add_by_hash(const std::string& hash, std::size_t ordinal, std::string text);

    std::string to_json() const;
    const std::map<std::string, std::string>& fixtures() const noexcept { return fixtures_; }

    std::string identity() const override;
    std::vector<std::string> generate(const GenerationRequest& req) override;
    std::string generate_sample(const GenerationRequest& req, std::size_t ordinal) override;

private:
    const std::string& lookup(const std::string& hash, std::size_t ordinal) const;

    std::map<std::string, std::string> fixtures_;
};

struct RemoteConfig {
    /// Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string api_key;
    std::chrono::seconds timeout{60};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    /// Ask for all samples in one request via the `n` field. Missing choices
    /// are topped up with single-sample requests.
    bool multi_choice = true;
};

/// Chat-completion client: the prompt becomes a single user message and
/// completions are read from choices[i].message.content.
class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(RemoteConfig cfg);

    std::string identity() const override;
    std::vector<std::string> generate(const GenerationRequest& req) override;
    std::string generate_sample(const GenerationRequest& req, std::size_t ordinal) override;

    const RemoteConfig& config() const noexcept { return cfg_; }

private:
    std::vector<std::string> post(const GenerationRequest& req, std::size_t n);
    std::vector<std::string> post_once(const GenerationRequest& req, std::size_t n);

    RemoteConfig cfg_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
};

/// Builds the JSON body sent by RemoteBackend.
std::string chat_request_body(const GenerationRequest& req, std::size_t n);

/// Extracts choices[i].message.content in order. Throws BackendError on
/// malformed responses.
std::vector<std::string> parse_chat_response(std::string_view body);

/// Calls backend.generate and fills in fingerprints.
GenerationBatch generate(Backend& backend, const GenerationRequest& req);

struct CacheStats {
    std::size_t entries = 0;
    std::size_t bytes = 0;
    std::size_t corrupt = 0;
};

/// One file per sample fingerprint under `root`. Each file holds a checksum
/// header line followed by the completion bytes. Writes go through a
/// temporary file and rename, so readers never see partial entries.
class GenerationCache {
public:
    explicit GenerationCache(std::filesystem::path root);

    /// nullopt on a miss or a corrupt entry (the latter logs a warning).
    std::optional<std::string> lookup(const std::string& fingerprint) const;
    void store(const std::string& fingerprint, std::string_view text);

    CacheStats stats() const;
    /// Removes every entry; returns how many were removed.
    std::size_t clear();

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path entry_path(const std::string& fingerprint) const;

private:
    std::mutex& stripe(const std::string& fingerprint) const;

    std::filesystem::path root_;
    mutable std::array<std::mutex, 64> stripes_;
};

/// Per-sample cache lookup; only missing ordinals reach the backend. When
/// every sample is missing the backend is asked for the whole batch at once.
GenerationBatch cached_generate(GenerationCache& cache, Backend& backend, const GenerationRequest& req);

}  // namespace csqe
