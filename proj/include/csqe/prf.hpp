#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "csqe/index.hpp"

namespace csqe {

/// RM3 settings. Defaults mirror the usual Anserini/Pyserini RM3 defaults.
struct Rm3Config {
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;
    double original_weight = 0.5;

    void validate() const;
};

/// Interpolates the query's term distribution with a relevance model built
/// from the top `fb_docs` BM25 hits:
///
///   P_fb(t)  ~  sum_d P_ml(t|d) * softmax(bm25)(d)      (top fb_terms, renormalized)
///   w(t)     =  original_weight * P_q(t) + (1 - original_weight) * P_fb(t)
///
/// Stopwords never receive feedback mass. Terms with zero final weight are
/// omitted. If the first pass finds nothing, P_q is returned unchanged.
/// Throws ConfigError when the query has no indexable terms.
WeightedQuery rm3_expand(const InvertedIndex& index, std::string_view query_text, const Rm3Config& cfg);

/// rm3_expand followed by search_weighted.
std::vector<ScoredHit> rm3_search(const InvertedIndex& index, std::string_view query_text,
                                  const Rm3Config& cfg, std::size_t k);

}  // namespace csqe
