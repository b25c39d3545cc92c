#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csqe/corpus.hpp"

namespace csqe {

/// Okapi BM25 parameters. Defaults follow the common Lucene/Anserini setting.
struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// A ranking element. Lists are ordered by score descending, then doc_id
/// ascending (see `ranks_before`).
struct ScoredHit {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

/// Strict ordering used for every ranked list.
inline bool ranks_before(const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

/// Analyzed term -> nonnegative weight. Ordered so that scoring and
/// serialization are reproducible.
struct WeightedQuery {
    std::map<std::string, double> weights;

    /// Throws ConfigError unless every weight is finite and >= 0 and at least
    /// one is positive.
    void validate() const;

    /// Term counts of an analyzed token stream.
    static WeightedQuery from_tokens(const TokenStream& tokens);
};

/// Immutable after construction; safe to search from many threads.
class InvertedIndex {
public:
    /// Throws DataError for an empty collection or duplicate ids.
    /// Tokenization uses csqe::tokenize.
    static InvertedIndex build(std::vector<Document> docs, Bm25Params params = {});

    static InvertedIndex load(std::istream& in);
    void save(std::ostream& out) const;

    static InvertedIndex load_file(const std::string& path);
    void save_file(const std::string& path) const;

    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_len() const noexcept { return avg_doc_len_; }
    std::uint32_t doc_len(std::uint32_t ordinal) const { return doc_len_.at(ordinal); }
    const std::string& doc_id(std::uint32_t ordinal) const { return doc_ids_.at(ordinal); }
    const std::string& doc_text(std::uint32_t ordinal) const { return doc_texts_.at(ordinal); }
    std::optional<std::uint32_t> ordinal_of(std::string_view doc_id) const;
    const std::string* text_of(std::string_view doc_id) const;

    std::size_t vocabulary_size() const noexcept { return terms_.size(); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::uint32_t df(std::string_view term) const;
    std::span<const Posting> postings(std::string_view term) const;
    std::uint32_t tf(std::string_view term, std::uint32_t ordinal) const;

    /// (term, tf) pairs of one document, sorted by term.
    std::vector<std::pair<std::string, std::uint32_t>> doc_terms(std::uint32_t ordinal) const;

    const Bm25Params& params() const noexcept { return params_; }
    /// A copy of this index scoring with different parameters.
    InvertedIndex with_params(Bm25Params params) const;

    double idf(std::string_view term) const;
    /// BM25 contribution of one occurrence of `term` in the query; 0 when the
    /// term does not occur in the document.
    double term_score(std::string_view term, std::uint32_t ordinal) const;

    /// Scores every document sharing a term with the query and returns the
    /// top k. Repeated query tokens add one copy of the term score each.
    std::vector<ScoredHit> search(std::string_view query_text, std::size_t k) const;
    std::vector<ScoredHit> search_weighted(const WeightedQuery& query, std::size_t k) const;

private:
    InvertedIndex() = default;
    void finalize();
    std::optional<std::uint32_t> term_id(std::string_view term) const;
    double score_posting(std::uint32_t term, const Posting& p) const;

    Bm25Params params_;

    std::vector<std::string> doc_ids_;
    std::vector<std::string> doc_texts_;
    std::vector<std::uint32_t> doc_len_;
    double avg_doc_len_ = 0.0;
    std::unordered_map<std::string, std::uint32_t> doc_ordinals_;

    std::vector<std::string> terms_;  // sorted
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::vector<Posting>> forward_;  // per doc: (term id, tf)
};

/// Free-function spellings of the index operations.
inline InvertedIndex build_index(std::vector<Document> docs, Bm25Params params = {}) {
    return InvertedIndex::build(std::move(docs), params);
}

inline double bm25_term_score(const InvertedIndex& index, std::string_view term, std::uint32_t ordinal) {
    return index.term_score(term, ordinal);
}

inline std::vector<ScoredHit> search(const InvertedIndex& index, std::string_view query, std::size_t k) {
    return index.search(query, k);
}

inline std::vector<ScoredHit> search_weighted(const InvertedIndex& index, const WeightedQuery& query,
                                              std::size_t k) {
    return index.search_weighted(query, k);
}

}  // namespace csqe
