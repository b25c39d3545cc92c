#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "csqe/corpus.hpp"
#include "csqe/error.hpp"
#include "csqe/eval.hpp"
#include "csqe/expansion.hpp"
#include "csqe/index.hpp"
#include "csqe/llm.hpp"
#include "csqe/porter_stemmer.hpp"
#include "csqe/prf.hpp"

namespace py = pybind11;
using namespace csqe;

namespace {

using HitList = std::vector<std::pair<std::string, double>>;

HitList to_pairs(const std::vector<ScoredHit>& hits) {
    HitList out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.emplace_back(h.doc_id, h.score);
    return out;
}

Ranking to_ranking(const HitList& hits) {
    Ranking r;
    for (const auto& [id, s] : hits) r.push_back({id, s});
    return r;
}

PipelineConfig pipeline_config(std::size_t n_keqe, std::size_t n_csqe, std::size_t k_feedback,
                               std::size_t doc_tokens, double temperature, const std::string& model,
                               std::size_t top_k) {
    PipelineConfig cfg;
    cfg.n_keqe = n_keqe;
    cfg.n_csqe = n_csqe;
    cfg.k_feedback = k_feedback;
    cfg.doc_token_budget = doc_tokens;
    cfg.temperature = temperature;
    cfg.model_id = model;
    cfg.top_k = top_k;
    return cfg;
}

py::dict result_dict(const PipelineResult& r) {
    py::dict d;
    d["hits"] = to_pairs(r.hits);
    d["first_pass"] = to_pairs(r.first_pass);
    d["composed"] = r.expanded.composed;
    d["expansions"] = r.expanded.expansions;
    py::list extractions;
    for (const auto& e : r.extractions) {
        py::dict x;
        x["ordinals"] = e.relevant_doc_ordinals;
        x["sentences"] = e.sentences;
        extractions.append(x);
    }
    d["extractions"] = extractions;
    py::list prompts;
    for (const auto& t : r.trace) prompts.append(py::make_tuple(t.kind, t.prompt));
    d["prompts"] = prompts;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "BM25, RM3 and LLM query expansion";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", m.attr("Error").ptr());
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BackendError>(m, "BackendError", m.attr("Error").ptr());

    m.def("tokenize", [](const std::string& s) { return tokenize(s); });
    m.def("porter_stem", [](const std::string& s) { return porter_stem(s); });
    m.def("prompt_hash", [](const std::string& s) { return prompt_hash(s); });
    m.def("truncate_tokens", [](const std::string& s, std::size_t n) { return truncate_whitespace_tokens(s, n); });

    py::class_<InvertedIndex>(m, "Index")
        .def_static(
            "build",
            [](const std::vector<std::pair<std::string, std::string>>& docs, double k1, double b) {
                std::vector<Document> ds;
                for (const auto& [id, text] : docs) ds.push_back({id, text});
                return InvertedIndex::build(std::move(ds), Bm25Params{k1, b});
            },
            py::arg("docs"), py::arg("k1") = 0.9, py::arg("b") = 0.4)
        .def_static("load", &InvertedIndex::load_file)
        .def("save", &InvertedIndex::save_file)
        .def_property_readonly("doc_count", &InvertedIndex::doc_count)
        .def_property_readonly("avg_doc_len", &InvertedIndex::avg_doc_len)
        .def("df", [](const InvertedIndex& ix, const std::string& t) { return ix.df(t); })
        .def("idf", [](const InvertedIndex& ix, const std::string& t) { return ix.idf(t); })
        .def("text", [](const InvertedIndex& ix, const std::string& id) {
            const auto* t = ix.text_of(id);
            if (!t) throw py::key_error(id);
            return *t;
        })
        .def(
            "search",
            [](const InvertedIndex& ix, const std::string& q, std::size_t k) { return to_pairs(ix.search(q, k)); },
            py::arg("query"), py::arg("k") = 10, py::call_guard<py::gil_scoped_release>())
        .def(
            "search_weighted",
            [](const InvertedIndex& ix, const std::map<std::string, double>& w, std::size_t k) {
                return to_pairs(ix.search_weighted(WeightedQuery{w}, k));
            },
            py::arg("weights"), py::arg("k") = 10)
        .def(
            "rm3_expand",
            [](const InvertedIndex& ix, const std::string& q, std::size_t fb_docs, std::size_t fb_terms,
               double orig_weight) { return rm3_expand(ix, q, Rm3Config{fb_docs, fb_terms, orig_weight}).weights; },
            py::arg("query"), py::arg("fb_docs") = 10, py::arg("fb_terms") = 10, py::arg("orig_weight") = 0.5)
        .def(
            "rm3_search",
            [](const InvertedIndex& ix, const std::string& q, std::size_t k, std::size_t fb_docs,
               std::size_t fb_terms, double orig_weight) {
                return to_pairs(rm3_search(ix, q, Rm3Config{fb_docs, fb_terms, orig_weight}, k));
            },
            py::arg("query"), py::arg("k") = 10, py::arg("fb_docs") = 10, py::arg("fb_terms") = 10,
            py::arg("orig_weight") = 0.5);

    m.def("build_keqe_prompt", [](const std::string& q) { return build_keqe_prompt(q); });
    m.def("build_csqe_prompt", [](const std::string& q, const std::vector<std::string>& docs) {
        return build_csqe_prompt(q, docs);
    });
    m.def("parse_csqe_response", [](const std::string& raw, std::size_t k) {
        auto r = parse_csqe_response(raw, k);
        py::dict d;
        d["ordinals"] = r.relevant_doc_ordinals;
        d["sentences"] = r.sentences;
        d["warnings"] = r.warnings;
        return d;
    });
    m.def("verify_extraction", &verify_extraction);
    m.def("compose_expanded_query", [](const std::string& q, std::vector<std::string> expansions) {
        return compose_expanded_query(q, std::move(expansions)).composed;
    });

    py::class_<MockBackend>(m, "MockBackend")
        .def(py::init<>())
        .def_static("from_json", [](const std::string& s) { return MockBackend::from_json(s); })
        .def("add", [](MockBackend& b, const std::string& prompt, std::size_t ordinal, std::string text) {
            b.add(prompt, ordinal, std::move(text));
        })
        .def("to_json", &MockBackend::to_json)
        .def_property_readonly("calls", &MockBackend::calls);

    auto run_pipeline = [](bool csqe) {
        return [csqe](const InvertedIndex& ix, const std::string& query, MockBackend& backend, std::size_t n_keqe,
                      std::size_t n_csqe, std::size_t k_feedback, std::size_t doc_tokens, double temperature,
                      const std::string& model, std::size_t top_k) {
            LlmClient llm(backend);
            auto cfg = pipeline_config(n_keqe, csqe ? n_csqe : 0, k_feedback, doc_tokens, temperature, model, top_k);
            Query q{"q", query};
            return result_dict(csqe ? csqe_pipeline(q, ix, llm, cfg) : keqe_pipeline(q, ix, llm, cfg));
        };
    };
    m.def("csqe_pipeline", run_pipeline(true), py::arg("index"), py::arg("query"), py::arg("backend"),
          py::arg("n_keqe") = 2, py::arg("n_csqe") = 2, py::arg("k_feedback") = 10, py::arg("doc_tokens") = 128,
          py::arg("temperature") = 1.0, py::arg("model") = "gpt-3.5-turbo", py::arg("top_k") = 1000);
    m.def("keqe_pipeline", run_pipeline(false), py::arg("index"), py::arg("query"), py::arg("backend"),
          py::arg("n_keqe") = 5, py::arg("n_csqe") = 0, py::arg("k_feedback") = 10, py::arg("doc_tokens") = 128,
          py::arg("temperature") = 1.0, py::arg("model") = "gpt-3.5-turbo", py::arg("top_k") = 1000);

    m.def(
        "evaluate",
        [](const std::map<std::string, HitList>& run, const std::map<std::string, std::map<std::string, int>>& qrels,
           const std::string& metrics, int rel_threshold) {
            RunFile rf;
            for (const auto& [qid, hits] : run) {
                auto r = to_ranking(hits);
                std::sort(r.begin(), r.end(), ranks_before);
                rf.rankings[qid] = std::move(r);
            }
            Qrels qr{{qrels.begin(), qrels.end()}};
            auto report = evaluate_run(rf, qr, MetricSpec::parse_list(metrics), EvalOptions{rel_threshold});
            return std::make_pair(report.mean, report.per_query);
        },
        py::arg("run"), py::arg("qrels"), py::arg("metrics") = "map,ndcg_cut.10,recall.1000",
        py::arg("rel_threshold") = 1);
}
