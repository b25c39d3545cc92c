#include <unordered_set>

#include "csqe/error.hpp"
#include "csqe/expansion.hpp"
#include "csqe/log.hpp"

namespace csqe {
namespace {

GenerationRequest make_request(std::string prompt, std::size_t n, const PipelineConfig& cfg) {
    GenerationRequest req;
    req.prompt = std::move(prompt);
    req.n_samples = n;
    req.temperature = cfg.temperature;
    req.model_id = cfg.model_id;
    return req;
}

// Hypothetical answers with empty completions dropped.
std::vector<std::string> sample_passages(const Query& query, const LlmClient& llm, const PipelineConfig& cfg,
                                         PipelineResult& result) {
    std::vector<std::string> passages;
    if (cfg.n_keqe == 0) return passages;
    auto req = make_request(build_keqe_prompt(query.text), cfg.n_keqe, cfg);
    auto batch = llm.generate(req);
    for (const auto& text : batch.texts) {
        auto p = normalize_whitespace(text);
        if (p.empty()) {
            log::info("query {}: dropping empty KEQE completion", query.id);
            continue;
        }
        passages.push_back(std::move(p));
    }
    result.trace.push_back(GenerationTrace{"keqe", std::move(req.prompt), std::move(batch.texts)});
    return passages;
}

void finish(const Query& query, const InvertedIndex& index, const PipelineConfig& cfg,
            std::vector<std::string> expansions, PipelineResult& result) {
    result.expanded = compose_expanded_query(query.text, std::move(expansions));
    result.hits = index.search(result.expanded.composed, cfg.top_k);
}

}  // namespace

PipelineConfig PipelineConfig::keqe_defaults() {
    PipelineConfig cfg;
    cfg.n_keqe = 5;
    cfg.n_csqe = 0;
    return cfg;
}

PipelineConfig PipelineConfig::csqe_defaults() {
    PipelineConfig cfg;
    cfg.n_keqe = 2;
    cfg.n_csqe = 2;
    return cfg;
}

void PipelineConfig::validate() const {
    if (k_feedback < 1) throw ConfigError("k_feedback must be at least 1");
    if (doc_token_budget < 1) throw ConfigError("doc_token_budget must be at least 1");
    if (n_keqe + n_csqe < 1) throw ConfigError("n_keqe + n_csqe must be at least 1");
    if (top_k < 1) throw ConfigError("top_k must be at least 1");
}

GenerationBatch LlmClient::generate(const GenerationRequest& req) const {
    return cache_ ? cached_generate(*cache_, backend_, req) : csqe::generate(backend_, req);
}

PipelineResult keqe_pipeline(const Query& query, const InvertedIndex& index, const LlmClient& llm,
                             const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.n_keqe < 1) throw ConfigError("KEQE needs n_keqe >= 1");
    PipelineResult result;
    auto passages = sample_passages(query, llm, cfg, result);
    finish(query, index, cfg, std::move(passages), result);
    return result;
}

PipelineResult csqe_pipeline(const Query& query, const InvertedIndex& index, const LlmClient& llm,
                             const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.n_csqe < 1) throw ConfigError("CSQE needs n_csqe >= 1");
    PipelineResult result;
    result.first_pass = index.search(query.text, cfg.k_feedback);

    std::vector<std::string> expansions;
    if (result.first_pass.empty()) {
        log::info("query {}: first pass retrieved nothing, using hypothetical answers only", query.id);
    } else {
        std::vector<std::string> docs;
        docs.reserve(result.first_pass.size());
        for (const auto& hit : result.first_pass)
            docs.push_back(truncate_whitespace_tokens(*index.text_of(hit.doc_id), cfg.doc_token_budget));

        auto req = make_request(build_csqe_prompt(query.text, docs), cfg.n_csqe, cfg);
        auto batch = llm.generate(req);
        std::unordered_set<std::string> seen;
        for (const auto& text : batch.texts) {
            auto extraction = parse_csqe_response(text, docs.size());
            for (const auto& s : extraction.sentences) {
                auto sentence = normalize_whitespace(s);
                if (!sentence.empty() && seen.insert(sentence).second) expansions.push_back(std::move(sentence));
            }
            result.extractions.push_back(std::move(extraction));
        }
        result.trace.push_back(GenerationTrace{"csqe", std::move(req.prompt), std::move(batch.texts)});
    }

    for (auto& p : sample_passages(query, llm, cfg, result)) expansions.push_back(std::move(p));
    finish(query, index, cfg, std::move(expansions), result);
    return result;
}

}  // namespace csqe
