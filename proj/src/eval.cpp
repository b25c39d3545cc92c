#include "csqe/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csqe/corpus.hpp"
#include "csqe/error.hpp"
#include "csqe/log.hpp"

namespace csqe {
namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

double gain_of(int grade, Gain gain) {
    if (grade <= 0) return 0.0;
    return gain == Gain::Linear ? static_cast<double>(grade) : std::exp2(static_cast<double>(grade)) - 1.0;
}

int grade_of(const Judgments& j, const std::string& doc) {
    auto it = j.find(doc);
    return it == j.end() ? 0 : it->second;
}

std::size_t relevant_count(const Judgments& j, int threshold) {
    return static_cast<std::size_t>(
        std::count_if(j.begin(), j.end(), [&](const auto& kv) { return kv.second >= threshold; }));
}

}  // namespace

const Judgments* Qrels::find(std::string_view qid) const {
    auto it = judgments.find(std::string(qid));
    return it == judgments.end() ? nullptr : &it->second;
}

Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() != 4) throw DataError("expected `qid 0 docid grade`", line_no);
        int grade = 0;
        if (!parse_number(fields[3], grade)) throw DataError("grade is not an integer", line_no);
        if (grade < 0) throw DataError("grade must be nonnegative", line_no);
        qrels.judgments[std::string(fields[0])][std::string(fields[2])] = grade;
    }
    return qrels;
}

RunFile parse_trec_run(std::istream& in) {
    RunFile run;
    std::map<std::string, std::set<std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() != 6) throw DataError("expected `qid Q0 docid rank score tag`", line_no);
        double score = 0.0;
        if (!parse_number(fields[4], score) || !std::isfinite(score))
            throw DataError("score is not a finite number", line_no);
        std::string qid(fields[0]);
        std::string doc(fields[2]);
        if (!seen[qid].insert(doc).second)
            throw DataError("document \"" + doc + "\" listed twice for query \"" + qid + "\"", line_no);
        run.rankings[qid].push_back(ScoredHit{std::move(doc), score});
    }
    for (auto& [qid, ranking] : run.rankings) std::sort(ranking.begin(), ranking.end(), ranks_before);
    return run;
}

void write_trec_run(std::ostream& out, const std::vector<std::pair<std::string, Ranking>>& rankings,
                    std::string_view tag) {
    for (const auto& [qid, ranking] : rankings) {
        for (std::size_t i = 0; i < ranking.size(); ++i)
            out << fmt::format("{} Q0 {} {} {:.6f} {}\n", qid, ranking[i].doc_id, i + 1, ranking[i].score, tag);
    }
}

void write_trec_run(std::ostream& out, const RunFile& run, std::string_view tag) {
    std::vector<std::pair<std::string, Ranking>> ordered(run.rankings.begin(), run.rankings.end());
    write_trec_run(out, ordered, tag);
}

std::optional<double> ndcg_at_k(const Ranking& ranking, const Judgments& judgments, std::size_t k, Gain gain) {
    if (k == 0) throw ConfigError("nDCG cutoff must be at least 1");
    std::vector<double> ideal;
    for (const auto& [doc, grade] : judgments)
        if (grade > 0) ideal.push_back(gain_of(grade, gain));
    if (ideal.empty()) return std::nullopt;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());

    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) idcg += ideal[i] / std::log2(static_cast<double>(i + 2));
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i)
        dcg += gain_of(grade_of(judgments, ranking[i].doc_id), gain) / std::log2(static_cast<double>(i + 2));
    return dcg / idcg;
}

std::optional<double> average_precision(const Ranking& ranking, const Judgments& judgments, int rel_threshold) {
    if (rel_threshold < 1) throw ConfigError("relevance threshold must be at least 1");
    const std::size_t total = relevant_count(judgments, rel_threshold);
    if (total == 0) return std::nullopt;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (grade_of(judgments, ranking[i].doc_id) >= rel_threshold) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(total);
}

std::optional<double> recall_at_k(const Ranking& ranking, const Judgments& judgments, std::size_t k,
                                  int rel_threshold) {
    if (k == 0) throw ConfigError("recall cutoff must be at least 1");
    if (rel_threshold < 1) throw ConfigError("relevance threshold must be at least 1");
    const std::size_t total = relevant_count(judgments, rel_threshold);
    if (total == 0) return std::nullopt;
    std::size_t found = 0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i)
        if (grade_of(judgments, ranking[i].doc_id) >= rel_threshold) ++found;
    return static_cast<double>(found) / static_cast<double>(total);
}

MetricSpec MetricSpec::parse(std::string_view spec) {
    auto with_cutoff = [&](std::string_view prefix, Kind kind) -> std::optional<MetricSpec> {
        if (spec.substr(0, prefix.size()) != prefix) return std::nullopt;
        std::size_t k = 0;
        if (!parse_number(spec.substr(prefix.size()), k) || k == 0)
            throw ConfigError("bad metric cutoff in \"" + std::string(spec) + "\"");
        return MetricSpec{kind, k};
    };
    if (spec == "map") return MetricSpec{Kind::Map, 0};
    if (auto m = with_cutoff("ndcg_cut.", Kind::Ndcg)) return *m;
    if (auto m = with_cutoff("recall.", Kind::Recall)) return *m;
    throw ConfigError("unknown metric \"" + std::string(spec) + "\" (expected map, ndcg_cut.K or recall.K)");
}

std::vector<MetricSpec> MetricSpec::parse_list(std::string_view specs) {
    std::vector<MetricSpec> out;
    std::size_t pos = 0;
    while (pos <= specs.size()) {
        auto comma = specs.find(',', pos);
        if (comma == std::string_view::npos) comma = specs.size();
        auto item = specs.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.push_back(parse(item));
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("no metrics requested");
    return out;
}

std::string MetricSpec::name() const {
    switch (kind) {
        case Kind::Map: return "map";
        case Kind::Ndcg: return "ndcg_cut." + std::to_string(k);
        case Kind::Recall: return "recall." + std::to_string(k);
    }
    return "?";
}

MetricReport evaluate_run(const RunFile& run, const Qrels& qrels, const std::vector<MetricSpec>& metrics,
                          const EvalOptions& options) {
    MetricReport report;
    for (const auto& m : metrics) report.metrics.push_back(m.name());
    if (run.rankings.empty()) report.warnings.push_back("run contains no queries");

    std::map<std::string, double> sums;
    for (const auto& [qid, ranking] : run.rankings) {
        const Judgments* judged = qrels.find(qid);
        if (!judged) {
            report.warnings.push_back("query " + qid + " has no judgments; skipped");
            continue;
        }
        for (const auto& m : metrics) {
            std::optional<double> value;
            switch (m.kind) {
                case MetricSpec::Kind::Map: value = average_precision(ranking, *judged, options.rel_threshold); break;
                case MetricSpec::Kind::Ndcg: value = ndcg_at_k(ranking, *judged, m.k, options.gain); break;
                case MetricSpec::Kind::Recall:
                    value = recall_at_k(ranking, *judged, m.k, options.rel_threshold);
                    break;
            }
            if (!value) continue;
            auto name = m.name();
            report.per_query[qid][name] = *value;
            sums[name] += *value;
            ++report.evaluated[name];
        }
        if (!report.per_query.count(qid)) report.warnings.push_back("query " + qid + " has no relevant documents; excluded");
    }
    for (const auto& name : report.metrics) {
        auto n = report.evaluated[name];
        report.mean[name] = n ? sums[name] / static_cast<double>(n) : 0.0;
    }
    if (report.per_query.empty()) report.warnings.push_back("no queries were evaluated");
    for (const auto& w : report.warnings) log::warn("{}", w);
    return report;
}

std::string MetricReport::to_table(bool include_per_query) const {
    std::size_t width = 6;
    for (const auto& m : metrics) width = std::max(width, m.size());
    std::size_t qwidth = 3;
    if (include_per_query)
        for (const auto& [qid, _] : per_query) qwidth = std::max(qwidth, qid.size());

    std::string out;
    if (include_per_query) {
        for (const auto& [qid, values] : per_query)
            for (const auto& m : metrics)
                if (auto it = values.find(m); it != values.end())
                    out += fmt::format("{:<{}}  {:<{}}  {:.4f}\n", m, width, qid, qwidth, it->second);
    }
    for (const auto& m : metrics) {
        out += fmt::format("{:<{}}  {:<{}}  {:.4f}\n", m, width, "all", qwidth, mean.at(m));
    }
    out += fmt::format("{:<{}}  {:<{}}  {}\n", "num_q", width, "all", qwidth, evaluated_queries());
    return out;
}

std::string MetricReport::to_json() const {
    nlohmann::json doc;
    doc["metrics"] = metrics;
    doc["mean"] = mean;
    doc["evaluated"] = evaluated;
    doc["per_query"] = per_query;
    doc["warnings"] = warnings;
    return doc.dump(2) + "\n";
}

}  // namespace csqe
