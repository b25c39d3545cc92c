#include "cli.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "csqe/corpus.hpp"
#include "csqe/error.hpp"
#include "csqe/eval.hpp"
#include "csqe/expansion.hpp"
#include "csqe/index.hpp"
#include "csqe/llm.hpp"
#include "csqe/log.hpp"
#include "csqe/prf.hpp"
#include "run_config.hpp"

namespace csqe::cli {
namespace {

namespace fs = std::filesystem;

/// A usage problem found after parsing (missing inputs, bad combinations).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::string read_file(const std::string& path) {
    auto in = open_input(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

std::string safe_filename(std::string_view s) {
    std::string out;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                  c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception is
// rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (error) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

int cmd_index(const std::string& input, const std::string& output, double k1, double b, std::ostream& out) {
    auto in = open_input(input);
    auto docs = parse_jsonl_corpus(in);
    auto index = InvertedIndex::build(std::move(docs), Bm25Params{k1, b});
    index.save_file(output);
    out << fmt::format("indexed {} documents, {} terms, avg length {:.2f} -> {}\n", index.doc_count(),
                       index.vocabulary_size(), index.avg_doc_len(), output);
    return kOk;
}

struct SearchArgs {
    std::string index;
    std::string query;
    std::size_t topk = 10;
    bool rm3 = false;
    Rm3Config rm3_cfg;
};

int cmd_search(const SearchArgs& a, std::ostream& out) {
    auto index = InvertedIndex::load_file(a.index);
    auto hits = a.rm3 ? rm3_search(index, a.query, a.rm3_cfg, a.topk) : index.search(a.query, a.topk);
    for (std::size_t i = 0; i < hits.size(); ++i)
        out << fmt::format("{:>4}  {:<20}  {:.6f}\n", i + 1, hits[i].doc_id, hits[i].score);
    return kOk;
}

std::unique_ptr<Backend> make_backend(const RunOptions& o) {
    if (o.backend == "mock") {
        if (o.mock_fixtures.empty()) throw UsageError("--backend mock requires --mock-fixtures");
        return std::make_unique<MockBackend>(MockBackend::from_file(o.mock_fixtures));
    }
    if (o.backend == "remote") {
        if (o.endpoint.empty()) throw UsageError("--backend remote requires --endpoint");
        RemoteConfig cfg;
        cfg.endpoint = o.endpoint;
        if (const char* key = std::getenv("LLM_API_KEY")) cfg.api_key = key;
        cfg.max_retries = o.max_retries;
        cfg.timeout = std::chrono::seconds(o.timeout_s);
        return std::make_unique<RemoteBackend>(std::move(cfg));
    }
    throw UsageError("unknown backend \"" + o.backend + "\"");
}

void dump_trace(const fs::path& dir, const Query& q, const PipelineResult& r) {
    auto stem = safe_filename(q.id);
    for (const auto& t : r.trace) {
        write_file(dir / (stem + "." + t.kind + ".prompt.txt"), t.prompt);
        for (std::size_t i = 0; i < t.responses.size(); ++i)
            write_file(dir / fmt::format("{}.{}.response.{}.txt", stem, t.kind, i), t.responses[i]);
    }
    write_file(dir / (stem + ".query.txt"), r.expanded.composed + "\n");
}

int cmd_run(RunOptions o, std::ostream& out) {
    const std::vector<std::string> methods = {"bm25", "rm3", "keqe", "csqe"};
    if (o.method.empty()) throw UsageError("--method is required");
    if (std::find(methods.begin(), methods.end(), o.method) == methods.end())
        throw UsageError("unknown method \"" + o.method + "\"");
    if (o.index_path.empty()) throw UsageError("--index is required");
    if (o.queries_path.empty()) throw UsageError("--queries is required");
    if (o.output_path.empty()) throw UsageError("--output is required");
    if (o.tag.empty()) o.tag = o.method;
    if (o.topk < 1) throw UsageError("--topk must be at least 1");

    Rm3Config rm3{o.fb_docs, o.fb_terms, o.orig_weight};
    PipelineConfig pcfg;
    pcfg.k_feedback = o.k_feedback;
    pcfg.doc_token_budget = o.doc_tokens;
    pcfg.n_keqe = o.resolved_n_keqe();
    pcfg.n_csqe = o.method == "csqe" ? o.n_csqe : 0;
    pcfg.temperature = o.temperature;
    pcfg.model_id = o.model;
    pcfg.top_k = o.topk;
    try {
        if (o.method == "rm3") rm3.validate();
        if (o.method == "keqe" || o.method == "csqe") pcfg.validate();
        if (o.method == "keqe" && pcfg.n_keqe < 1) throw ConfigError("--n-keqe must be at least 1 for keqe");
        if (o.method == "csqe" && pcfg.n_csqe < 1) throw ConfigError("--n-csqe must be at least 1 for csqe");
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }

    auto index = InvertedIndex::load_file(o.index_path);
    if (o.k1 || o.b) index = index.with_params(Bm25Params{o.k1.value_or(index.params().k1), o.b.value_or(index.params().b)});
    auto qin = open_input(o.queries_path);
    auto queries = parse_queries_tsv(qin);

    std::unique_ptr<Backend> backend;
    std::unique_ptr<GenerationCache> cache;
    if (o.method == "keqe" || o.method == "csqe") {
        backend = make_backend(o);
        if (!o.cache_dir.empty()) cache = std::make_unique<GenerationCache>(o.cache_dir);
    }
    std::optional<LlmClient> llm;
    if (backend) llm.emplace(*backend, cache.get());

    std::vector<std::pair<std::string, Ranking>> rankings(queries.size());
    parallel_for(queries.size(), o.jobs, [&](std::size_t i) {
        const auto& q = queries[i];
        rankings[i].first = q.id;
        if (o.method == "bm25") {
            rankings[i].second = index.search(q.text, o.topk);
        } else if (o.method == "rm3") {
            rankings[i].second = rm3_search(index, q.text, rm3, o.topk);
        } else {
            auto result = o.method == "keqe" ? keqe_pipeline(q, index, *llm, pcfg) : csqe_pipeline(q, index, *llm, pcfg);
            if (!o.dump_prompts.empty()) dump_trace(o.dump_prompts, q, result);
            rankings[i].second = std::move(result.hits);
        }
        log::debug("query {}: {} hits", q.id, rankings[i].second.size());
    });

    std::ostringstream run_text;
    write_trec_run(run_text, rankings, o.tag);
    write_file(o.output_path, run_text.str());

    auto manifest = make_manifest(o, backend ? backend->identity() : std::string());
    const std::string manifest_path = o.output_path + ".manifest.json";
    write_file(manifest_path, manifest.dump(2) + "\n");

    out << fmt::format("wrote {} queries to {} (manifest {})", queries.size(), o.output_path, manifest_path);
    if (backend) out << fmt::format(", {} backend call(s)", backend->calls());
    out << "\n";
    return kOk;
}

struct EvalArgs {
    std::string run;
    std::string qrels;
    std::string metrics = "map,ndcg_cut.10,recall.1000";
    int rel_threshold = 1;
    std::string gain = "linear";
    bool json = false;
    bool per_query = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<MetricSpec> specs;
    EvalOptions opts;
    try {
        specs = MetricSpec::parse_list(a.metrics);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    opts.rel_threshold = a.rel_threshold;
    opts.gain = a.gain == "exp" ? Gain::Exponential : Gain::Linear;

    auto run_in = open_input(a.run);
    auto run = parse_trec_run(run_in);
    auto qrels_in = open_input(a.qrels);
    auto qrels = parse_qrels(qrels_in);

    auto report = evaluate_run(run, qrels, specs, opts);
    if (report.evaluated_queries() == 0) {
        err << "error: no query in " << a.run << " has relevance judgments in " << a.qrels << "\n";
        return kDataError;
    }
    out << (a.json ? report.to_json() : report.to_table(a.per_query));
    return kOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lexical retrieval with BM25, RM3 and LLM query expansion (KEQE, CSQE)", "csqe"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags take precedence)");
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "Increase log verbosity (-v info, -vv debug)");
    app.set_version_flag("--version", std::string("csqe ") + CSQE_VERSION);

    // index
    std::string index_input, index_output;
    Bm25Params index_params;
    auto* index_cmd = app.add_subcommand("index", "Build a BM25 index from a JSONL corpus");
    index_cmd->fallthrough();
    index_cmd->add_option("--input", index_input, "Corpus JSONL (id, contents, optional title)")->required();
    index_cmd->add_option("--output", index_output, "Index file to write")->required();
    index_cmd->add_option("--k1", index_params.k1, "BM25 k1 stored with the index")->capture_default_str();
    index_cmd->add_option("--b", index_params.b, "BM25 b stored with the index")->capture_default_str();

    // search
    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Run one ad-hoc query against an index");
    search_cmd->fallthrough();
    search_cmd->add_option("--index", search.index, "Index file")->required();
    search_cmd->add_option("--query", search.query, "Query text")->required();
    search_cmd->add_option("--topk", search.topk, "Number of hits")->capture_default_str();
    search_cmd->add_flag("--rm3", search.rm3, "Expand the query with RM3 first");
    search_cmd->add_option("--fb-docs", search.rm3_cfg.fb_docs, "RM3 feedback documents")->capture_default_str();
    search_cmd->add_option("--fb-terms", search.rm3_cfg.fb_terms, "RM3 feedback terms")->capture_default_str();
    search_cmd->add_option("--orig-weight", search.rm3_cfg.original_weight, "RM3 original query weight")
        ->capture_default_str();

    // run
    RunOptions run;
    std::string from_manifest;
    double k1 = 0.0, b = 0.0;
    std::size_t n_keqe = 0;
    auto* run_cmd = app.add_subcommand("run", "Retrieve for a query set and write a TREC run file plus manifest");
    run_cmd->fallthrough();
    run_cmd->add_option("--method", run.method, "bm25, rm3, keqe or csqe")
        ->check(CLI::IsMember({"bm25", "rm3", "keqe", "csqe"}));
    run_cmd->add_option("--index", run.index_path, "Index file");
    run_cmd->add_option("--queries", run.queries_path, "Queries TSV (qid<TAB>text)");
    run_cmd->add_option("--output", run.output_path, "Run file to write; the manifest goes to <output>.manifest.json");
    run_cmd->add_option("--from-manifest", from_manifest, "Take unset options from a previous run's manifest");
    run_cmd->add_option("--tag", run.tag, "Run tag (defaults to the method name)");
    run_cmd->add_option("--topk", run.topk, "Ranking depth per query")->capture_default_str();
    auto* k1_opt = run_cmd->add_option("--k1", k1, "Override the index's BM25 k1");
    auto* b_opt = run_cmd->add_option("--b", b, "Override the index's BM25 b");
    run_cmd->add_option("--fb-docs", run.fb_docs, "RM3 feedback documents (assumed default)")
        ->capture_default_str();
    run_cmd->add_option("--fb-terms", run.fb_terms, "RM3 feedback terms (assumed default)")->capture_default_str();
    run_cmd->add_option("--orig-weight", run.orig_weight, "RM3 original query weight (assumed default)")
        ->capture_default_str();
    run_cmd->add_option("--k-feedback", run.k_feedback, "CSQE: first-pass documents shown to the LLM")
        ->capture_default_str();
    run_cmd->add_option("--doc-tokens", run.doc_tokens, "CSQE: whitespace tokens kept per document")
        ->capture_default_str();
    auto* n_keqe_opt = run_cmd->add_option("--n-keqe", n_keqe, "Hypothetical answers to sample (default 5 for keqe, 2 for csqe)");
    run_cmd->add_option("--n-csqe", run.n_csqe, "CSQE: corpus-steered generations to sample")->capture_default_str();
    run_cmd->add_option("--temperature", run.temperature, "Sampling temperature")->capture_default_str();
    run_cmd->add_option("--model", run.model, "Model id sent to the backend")->capture_default_str();
    run_cmd->add_option("--backend", run.backend, "remote or mock")
        ->check(CLI::IsMember({"remote", "mock"}))
        ->capture_default_str();
    run_cmd->add_option("--endpoint", run.endpoint, "Chat-completions URL (API key from $LLM_API_KEY)");
    run_cmd->add_option("--mock-fixtures", run.mock_fixtures, "JSON fixtures for the mock backend");
    run_cmd->add_option("--cache-dir", run.cache_dir, "Generation cache directory");
    run_cmd->add_option("--max-retries", run.max_retries, "Retries for retriable backend errors")->capture_default_str();
    run_cmd->add_option("--timeout", run.timeout_s, "Backend request timeout in seconds")->capture_default_str();
    run_cmd->add_option("--jobs", run.jobs, "Queries processed in parallel")->capture_default_str();
    run_cmd->add_option("--dump-prompts", run.dump_prompts, "Write every prompt and raw response to this directory");

    // eval
    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a TREC run file against qrels");
    eval_cmd->fallthrough();
    eval_cmd->add_option("--run", eval.run, "TREC run file")->required();
    eval_cmd->add_option("--qrels", eval.qrels, "TREC qrels file")->required();
    eval_cmd->add_option("--metrics", eval.metrics, "Comma-separated: map, ndcg_cut.K, recall.K")->capture_default_str();
    eval_cmd->add_option("--rel-threshold", eval.rel_threshold, "Minimum grade counted as relevant for map/recall")
        ->capture_default_str();
    eval_cmd->add_option("--gain", eval.gain, "nDCG gain: linear or exp")
        ->check(CLI::IsMember({"linear", "exp"}))
        ->capture_default_str();
    eval_cmd->add_flag("--json", eval.json, "Print JSON instead of a table");
    eval_cmd->add_flag("--per-query", eval.per_query, "Include per-query rows in the table");

    // cache
    std::string cache_dir;
    auto* cache_cmd = app.add_subcommand("cache", "Inspect or clear the generation cache");
    cache_cmd->require_subcommand(1);
    auto* stats_cmd = cache_cmd->add_subcommand("stats", "Show entry count and size");
    auto* clear_cmd = cache_cmd->add_subcommand("clear", "Delete every cached generation");
    for (auto* c : {stats_cmd, clear_cmd}) {
        c->fallthrough();
        c->add_option("--cache-dir", cache_dir, "Generation cache directory")->required();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    log::set_level(verbosity >= 2 ? log::Level::Debug : verbosity == 1 ? log::Level::Info : log::Level::Warn);

    CLI::App* active = app.get_subcommands().front();
    try {
        if (active == index_cmd) return cmd_index(index_input, index_output, index_params.k1, index_params.b, out);
        if (active == search_cmd) return cmd_search(search, out);
        if (active == eval_cmd) return cmd_eval(eval, out, err);
        if (active == run_cmd) {
            if (!from_manifest.empty()) {
                // Manifest values fill options not given on the command line.
                RunOptions explicit_opts = run;
                auto manifest = nlohmann::json::parse(read_file(from_manifest), nullptr, false);
                if (manifest.is_discarded() || !manifest.contains("config"))
                    throw DataError("malformed manifest " + from_manifest);
                RunOptions merged;
                options_from_json(manifest["config"], merged);
                for (auto* opt : run_cmd->get_options()) {
                    if (opt->count() == 0) continue;
                    const auto name = opt->get_name();
                    if (name == "--method") merged.method = explicit_opts.method;
                    else if (name == "--index") merged.index_path = explicit_opts.index_path;
                    else if (name == "--queries") merged.queries_path = explicit_opts.queries_path;
                    else if (name == "--tag") merged.tag = explicit_opts.tag;
                    else if (name == "--topk") merged.topk = explicit_opts.topk;
                    else if (name == "--fb-docs") merged.fb_docs = explicit_opts.fb_docs;
                    else if (name == "--fb-terms") merged.fb_terms = explicit_opts.fb_terms;
                    else if (name == "--orig-weight") merged.orig_weight = explicit_opts.orig_weight;
                    else if (name == "--k-feedback") merged.k_feedback = explicit_opts.k_feedback;
                    else if (name == "--doc-tokens") merged.doc_tokens = explicit_opts.doc_tokens;
                    else if (name == "--n-csqe") merged.n_csqe = explicit_opts.n_csqe;
                    else if (name == "--temperature") merged.temperature = explicit_opts.temperature;
                    else if (name == "--model") merged.model = explicit_opts.model;
                    else if (name == "--backend") merged.backend = explicit_opts.backend;
                    else if (name == "--endpoint") merged.endpoint = explicit_opts.endpoint;
                    else if (name == "--mock-fixtures") merged.mock_fixtures = explicit_opts.mock_fixtures;
                    else if (name == "--cache-dir") merged.cache_dir = explicit_opts.cache_dir;
                    else if (name == "--max-retries") merged.max_retries = explicit_opts.max_retries;
                    else if (name == "--timeout") merged.timeout_s = explicit_opts.timeout_s;
                }
                merged.output_path = explicit_opts.output_path;
                merged.jobs = explicit_opts.jobs;
                merged.dump_prompts = explicit_opts.dump_prompts;
                run = std::move(merged);
            }
            if (k1_opt->count()) run.k1 = k1;
            if (b_opt->count()) run.b = b;
            if (n_keqe_opt->count()) run.n_keqe = n_keqe;
            return cmd_run(std::move(run), out);
        }
        if (active == cache_cmd) {
            GenerationCache cache(cache_dir);
            if (cache_cmd->got_subcommand(stats_cmd)) {
                auto s = cache.stats();
                out << fmt::format("entries {}\nbytes   {}\ncorrupt {}\n", s.entries, s.bytes, s.corrupt);
            } else {
                out << fmt::format("removed {} entries\n", cache.clear());
            }
            return kOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << active->help();
        return kUsage;
    } catch (const FixtureMissError& e) {
        err << "backend error: " << e.what() << "\n";
        return kBackendError;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << "\n";
        return kBackendError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}

}  // namespace csqe::cli
