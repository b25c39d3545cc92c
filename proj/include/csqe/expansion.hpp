#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "csqe/corpus.hpp"
#include "csqe/index.hpp"
#include "csqe/llm.hpp"

namespace csqe {

/// Parsed answer to a CSQE prompt.
struct ExtractionResult {
    /// 1-based positions in the prompt's document list, in order of first mention.
    std::vector<std::size_t> relevant_doc_ordinals;
    std::vector<std::string> sentences;
    std::string raw_response;
    /// Out-of-range headers and unquoted fallback lines.
    std::vector<std::string> warnings;
};

struct ExpandedQuery {
    std::string original;
    std::vector<std::string> expansions;
    std::string composed;
};

struct PipelineConfig {
    std::size_t k_feedback = 10;
    std::size_t doc_token_budget = 128;
    std::size_t n_keqe = 2;
    std::size_t n_csqe = 2;
    double temperature = 1.0;
    std::string model_id = "gpt-3.5-turbo";
    /// Depth of the final ranking.
    std::size_t top_k = 1000;

    /// Five hypothetical answers, no corpus-steered generations.
    static PipelineConfig keqe_defaults();
    /// Two corpus-steered generations plus two hypothetical answers.
    static PipelineConfig csqe_defaults();

    void validate() const;
};

std::string build_keqe_prompt(std::string_view query);

/// The one-shot example (shark query, four passages, worked answer)
/// followed by the query and its numbered documents.
std::string build_csqe_prompt(std::string_view query, const std::vector<std::string>& docs);

/// The worked answer embedded in the CSQE prompt.
std::string_view csqe_example_answer();
/// The four passages of the one-shot example.
const std::vector<std::string>& csqe_example_documents();

/// Reads `Document <n>:` headers (1 <= n <= k) and the double-quoted
/// sentences below each. Never throws; unusable responses give empty lists.
ExtractionResult parse_csqe_response(std::string_view raw, std::size_t k);

/// Fraction of sentences found verbatim (after whitespace normalization) in
/// some document. 1.0 for an empty sentence list.
double verify_extraction(const std::vector<std::string>& sentences, const std::vector<std::string>& docs);

/// The query repeated once per expansion, then the expansions, joined by
/// single spaces. No expansions gives the query alone.
ExpandedQuery compose_expanded_query(std::string_view query, std::vector<std::string> expansions);

/// Generation front end used by the pipelines: goes through the cache when
/// one is attached.
class LlmClient {
public:
    explicit LlmClient(Backend& backend, GenerationCache* cache = nullptr) : backend_(backend), cache_(cache) {}

    GenerationBatch generate(const GenerationRequest& req) const;
    Backend& backend() const noexcept { return backend_; }

private:
    Backend& backend_;
    GenerationCache* cache_;
};

/// One prompt and the completions it produced.
struct GenerationTrace {
    std::string kind;  // "keqe" or "csqe"
    std::string prompt;
    std::vector<std::string> responses;
};

struct PipelineResult {
    std::vector<ScoredHit> hits;
    ExpandedQuery expanded;
    std::vector<ScoredHit> first_pass;
    std::vector<ExtractionResult> extractions;
    std::vector<GenerationTrace> trace;
};

/// Hypothetical-answer expansion: n_keqe passages appended to the query.
PipelineResult keqe_pipeline(const Query& query, const InvertedIndex& index, const LlmClient& llm,
                             const PipelineConfig& cfg);

/// Corpus-steered expansion: key sentences extracted from the first-pass
/// documents, followed by n_keqe hypothetical answers.
PipelineResult csqe_pipeline(const Query& query, const InvertedIndex& index, const LlmClient& llm,
                             const PipelineConfig& cfg);

}  // namespace csqe
