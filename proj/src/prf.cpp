#include "csqe/prf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csqe/error.hpp"

namespace csqe {

void Rm3Config::validate() const {
    if (fb_docs < 1) throw ConfigError("fb_docs must be at least 1");
    if (fb_terms < 1) throw ConfigError("fb_terms must be at least 1");
    if (!(original_weight >= 0.0 && original_weight <= 1.0))
        throw ConfigError("original_weight must lie in [0, 1]");
}

WeightedQuery rm3_expand(const InvertedIndex& index, std::string_view query_text, const Rm3Config& cfg) {
    cfg.validate();
    auto tokens = tokenize(query_text);
    if (tokens.empty()) throw ConfigError("query has no indexable terms");

    std::map<std::string, double> original;
    for (const auto& t : tokens) original[t] += 1.0;
    for (auto& [t, w] : original) w /= static_cast<double>(tokens.size());

    auto hits = index.search(query_text, cfg.fb_docs);
    if (hits.empty()) return WeightedQuery{std::move(original)};

    // Softmax over first-pass scores, shifted by the max for stability.
    const double top = hits.front().score;
    std::vector<double> doc_weight;
    double z = 0.0;
    for (const auto& h : hits) {
        doc_weight.push_back(std::exp(h.score - top));
        z += doc_weight.back();
    }
    for (auto& w : doc_weight) w /= z;

    std::map<std::string, double> relevance;
    const auto& analyzer = default_analyzer();
    for (std::size_t i = 0; i < hits.size(); ++i) {
        auto ord = *index.ordinal_of(hits[i].doc_id);
        const double len = index.doc_len(ord);
        for (const auto& [term, tf] : index.doc_terms(ord)) {
            if (analyzer.is_stopword(term)) continue;
            relevance[term] += doc_weight[i] * (static_cast<double>(tf) / len);
        }
    }

    std::vector<std::pair<std::string, double>> ranked(relevance.begin(), relevance.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > cfg.fb_terms) ranked.resize(cfg.fb_terms);
    double mass = 0.0;
    for (const auto& [t, p] : ranked) mass += p;

    std::map<std::string, double> feedback;
    for (const auto& [t, p] : ranked) feedback[t] = p / mass;

    const double alpha = cfg.original_weight;
    WeightedQuery out;
    for (const auto& [t, p] : original) out.weights[t] += alpha * p;
    for (const auto& [t, p] : feedback) out.weights[t] += (1.0 - alpha) * p;
    std::erase_if(out.weights, [](const auto& kv) { return kv.second <= 0.0; });
    return out;
}

std::vector<ScoredHit> rm3_search(const InvertedIndex& index, std::string_view query_text,
                                  const Rm3Config& cfg, std::size_t k) {
    if (tokenize(query_text).empty()) return {};
    return index.search_weighted(rm3_expand(index, query_text, cfg), k);
}

}  // namespace csqe
