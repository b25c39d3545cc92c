#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace csqe::cli {

/// Every knob of a `run` invocation. Output locations are not part of the
/// manifest; everything else is.
struct RunOptions {
    std::string method;
    std::string index_path;
    std::string queries_path;
    std::string output_path;
    std::string tag;

    std::size_t topk = 1000;
    std::optional<double> k1;
    std::optional<double> b;

    // rm3
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;
    double orig_weight = 0.5;

    // keqe / csqe
    std::size_t k_feedback = 10;
    std::size_t doc_tokens = 128;
    std::optional<std::size_t> n_keqe;  // method-dependent default
    std::size_t n_csqe = 2;
    double temperature = 1.0;
    std::string model = "gpt-3.5-turbo";

    // llm
    std::string backend = "remote";
    std::string endpoint;
    std::string mock_fixtures;
    std::string cache_dir;
    int max_retries = 3;
    int timeout_s = 60;

    std::size_t jobs = 1;
    std::string dump_prompts;

    std::size_t resolved_n_keqe() const { return n_keqe.value_or(method == "keqe" ? 5 : 2); }
};

nlohmann::json options_to_json(const RunOptions& opts);

/// Fills `opts` fields named in `config` (the "config" object of a manifest).
void options_from_json(const nlohmann::json& config, RunOptions& opts);

/// Builds the manifest written next to a run file.
nlohmann::json make_manifest(const RunOptions& opts, const std::string& backend_identity);

/// RFC 3339 UTC timestamp for manifests. Honors SOURCE_DATE_EPOCH; runs
/// against the mock backend are pinned to the epoch so that their manifests
/// are reproducible.
std::string manifest_timestamp(bool deterministic);

}  // namespace csqe::cli
