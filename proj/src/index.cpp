#include "csqe/index.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csqe/error.hpp"

namespace csqe {

void WeightedQuery::validate() const {
    bool any_positive = false;
    for (const auto& [term, w] : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw ConfigError("weight for term \"" + term + "\" must be finite and nonnegative");
        if (w > 0.0) any_positive = true;
    }
    if (!any_positive) throw ConfigError("weighted query needs at least one positive weight");
}

WeightedQuery WeightedQuery::from_tokens(const TokenStream& tokens) {
    WeightedQuery q;
    for (const auto& t : tokens) q.weights[t] += 1.0;
    return q;
}

InvertedIndex InvertedIndex::build(std::vector<Document> docs, Bm25Params params) {
    if (docs.empty()) throw DataError("cannot build an index over an empty collection");

    InvertedIndex idx;
    idx.params_ = params;
    idx.doc_ids_.reserve(docs.size());
    idx.doc_texts_.reserve(docs.size());
    idx.doc_len_.reserve(docs.size());

    std::map<std::string, std::vector<Posting>> postings;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto& doc = docs[i];
        if (doc.id.empty()) throw DataError("document with empty id at position " + std::to_string(i));
        if (!idx.doc_ordinals_.emplace(doc.id, static_cast<std::uint32_t>(i)).second)
            throw DataError("duplicate document id \"" + doc.id + "\"");

        auto tokens = tokenize(doc.text);
        std::map<std::string, std::uint32_t> counts;
        for (auto& t : tokens) ++counts[t];
        for (auto& [term, tf] : counts)
            postings[term].push_back(Posting{static_cast<std::uint32_t>(i), tf});

        idx.doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
        idx.doc_ids_.push_back(std::move(doc.id));
        idx.doc_texts_.push_back(std::move(doc.text));
    }

    idx.terms_.reserve(postings.size());
    idx.postings_.reserve(postings.size());
    for (auto& [term, list] : postings) {
        idx.terms_.push_back(term);
        idx.postings_.push_back(std::move(list));
    }
    idx.finalize();
    return idx;
}

// Derives lookup tables and statistics from doc_len_, terms_ and postings_.
void InvertedIndex::finalize() {
    double total = 0.0;
    for (auto len : doc_len_) total += len;
    avg_doc_len_ = doc_len_.empty() ? 0.0 : total / static_cast<double>(doc_len_.size());

    doc_ordinals_.clear();
    for (std::uint32_t i = 0; i < doc_ids_.size(); ++i) doc_ordinals_.emplace(doc_ids_[i], i);

    term_ids_.clear();
    forward_.assign(doc_ids_.size(), {});
    for (std::uint32_t t = 0; t < terms_.size(); ++t) {
        term_ids_.emplace(terms_[t], t);
        for (const auto& p : postings_[t]) forward_[p.doc].push_back(Posting{t, p.tf});
    }
}

std::optional<std::uint32_t> InvertedIndex::ordinal_of(std::string_view doc_id) const {
    auto it = doc_ordinals_.find(std::string(doc_id));
    if (it == doc_ordinals_.end()) return std::nullopt;
    return it->second;
}

const std::string* InvertedIndex::text_of(std::string_view doc_id) const {
    auto ord = ordinal_of(doc_id);
    return ord ? &doc_texts_[*ord] : nullptr;
}

std::optional<std::uint32_t> InvertedIndex::term_id(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t InvertedIndex::df(std::string_view term) const {
    auto id = term_id(term);
    return id ? static_cast<std::uint32_t>(postings_[*id].size()) : 0;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto id = term_id(term);
    if (!id) return {};
    return postings_[*id];
}

std::uint32_t InvertedIndex::tf(std::string_view term, std::uint32_t ordinal) const {
    auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), ordinal,
                               [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    return (it != list.end() && it->doc == ordinal) ? it->tf : 0;
}

std::vector<std::pair<std::string, std::uint32_t>> InvertedIndex::doc_terms(std::uint32_t ordinal) const {
    std::vector<std::pair<std::string, std::uint32_t>> out;
    for (const auto& p : forward_.at(ordinal)) out.emplace_back(terms_[p.doc], p.tf);
    return out;
}

InvertedIndex InvertedIndex::with_params(Bm25Params params) const {
    InvertedIndex copy = *this;
    copy.params_ = params;
    return copy;
}

double InvertedIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(doc_count());
    const double df_t = static_cast<double>(df(term));
    return std::log(1.0 + (n - df_t + 0.5) / (df_t + 0.5));
}

double InvertedIndex::score_posting(std::uint32_t term, const Posting& p) const {
    const double n = static_cast<double>(doc_count());
    const double df_t = static_cast<double>(postings_[term].size());
    const double idf_t = std::log(1.0 + (n - df_t + 0.5) / (df_t + 0.5));
    const double tf = p.tf;
    const double len_ratio = avg_doc_len_ > 0.0 ? doc_len_[p.doc] / avg_doc_len_ : 0.0;
    const double norm = params_.k1 * (1.0 - params_.b + params_.b * len_ratio);
    return idf_t * tf * (params_.k1 + 1.0) / (tf + norm);
}

double InvertedIndex::term_score(std::string_view term, std::uint32_t ordinal) const {
    auto id = term_id(term);
    if (!id) return 0.0;
    const auto& list = postings_[*id];
    auto it = std::lower_bound(list.begin(), list.end(), ordinal,
                               [](const Posting& p, std::uint32_t d) { return p.doc < d; });
    if (it == list.end() || it->doc != ordinal) return 0.0;
    return score_posting(*id, *it);
}

std::vector<ScoredHit> InvertedIndex::search(std::string_view query_text, std::size_t k) const {
    if (k == 0) throw ConfigError("k must be at least 1");
    auto tokens = tokenize(query_text);
    if (tokens.empty()) return {};
    return search_weighted(WeightedQuery::from_tokens(tokens), k);
}

std::vector<ScoredHit> InvertedIndex::search_weighted(const WeightedQuery& query, std::size_t k) const {
    if (k == 0) throw ConfigError("k must be at least 1");
    query.validate();

    std::vector<double> acc(doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<char> seen(doc_count(), 0);
    for (const auto& [term, weight] : query.weights) {
        if (weight <= 0.0) continue;
        auto id = term_id(term);
        if (!id) continue;
        for (const auto& p : postings_[*id]) {
            acc[p.doc] += weight * score_posting(*id, p);
            if (!seen[p.doc]) {
                seen[p.doc] = 1;
                touched.push_back(p.doc);
            }
        }
    }

    std::vector<ScoredHit> hits;
    hits.reserve(touched.size());
    for (auto d : touched) hits.push_back(ScoredHit{doc_ids_[d], acc[d]});
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), ranks_before);
    hits.resize(n);
    return hits;
}

}  // namespace csqe
