#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csqe/index.hpp"

namespace csqe {

/// doc id -> grade for one query. Unlisted documents have grade 0.
using Judgments = std::map<std::string, int>;
using Ranking = std::vector<ScoredHit>;

struct Qrels {
    std::map<std::string, Judgments> judgments;

    /// nullptr when the query has no judgments at all.
    const Judgments* find(std::string_view qid) const;
};

/// `qid iter docid grade` lines; later duplicates overwrite earlier ones.
Qrels parse_qrels(std::istream& in);

/// Query id -> ranking, each ranking sorted with `ranks_before`.
struct RunFile {
    std::map<std::string, Ranking> rankings;
};

/// `qid Q0 docid rank score tag` lines. Rankings are re-sorted by score
/// (descending) then doc id. Duplicate (qid, docid) pairs are an error.
RunFile parse_trec_run(std::istream& in);

/// Writes `qid Q0 docid rank score tag`, ranks from 1, scores with six
/// decimals. Queries are written in the given order.
void write_trec_run(std::ostream& out, const std::vector<std::pair<std::string, Ranking>>& rankings,
                    std::string_view tag);
void write_trec_run(std::ostream& out, const RunFile& run, std::string_view tag);

enum class Gain { Linear, Exponential };

/// nDCG@k with IDCG over every judged document of the query. nullopt when
/// the query has no positive grades (excluded from averages).
std::optional<double> ndcg_at_k(const Ranking& ranking, const Judgments& judgments, std::size_t k,
                                Gain gain = Gain::Linear);

/// Binary relevance is grade >= rel_threshold. nullopt when nothing is relevant.
std::optional<double> average_precision(const Ranking& ranking, const Judgments& judgments, int rel_threshold = 1);

std::optional<double> recall_at_k(const Ranking& ranking, const Judgments& judgments, std::size_t k,
                                  int rel_threshold = 1);

/// `map`, `ndcg_cut.K` or `recall.K`.
struct MetricSpec {
    enum class Kind { Map, Ndcg, Recall };
    Kind kind;
    std::size_t k = 0;

    static MetricSpec parse(std::string_view spec);
    /// Comma-separated list of specs.
    static std::vector<MetricSpec> parse_list(std::string_view specs);
    std::string name() const;
};

struct EvalOptions {
    int rel_threshold = 1;
    Gain gain = Gain::Linear;
};

struct MetricReport {
    std::vector<std::string> metrics;
    /// Query id -> metric -> value, for queries where the metric is defined.
    std::map<std::string, std::map<std::string, double>> per_query;
    std::map<std::string, double> mean;
    std::map<std::string, std::size_t> evaluated;
    std::vector<std::string> warnings;

    /// Number of queries that received at least one value.
    std::size_t evaluated_queries() const { return per_query.size(); }

    std::string to_table(bool include_per_query = false) const;
    std::string to_json() const;
};

/// Scores every run query that has judgments; others are skipped with a
/// warning. Means are taken over the queries where each metric is defined.
MetricReport evaluate_run(const RunFile& run, const Qrels& qrels, const std::vector<MetricSpec>& metrics,
                          const EvalOptions& options = {});

}  // namespace csqe
