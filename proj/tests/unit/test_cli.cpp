#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "paths.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = csqe::cli::main(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = testpaths::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
        index = (dir / "toy.idx").string();
        auto r = run({"index", "--input", (testpaths::toy_dir() / "corpus.jsonl").string(), "--output", index});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    void TearDown() override { fs::remove_all(dir); }

    std::vector<std::string> toy_run(const std::string& method, const std::string& output) const {
        std::vector<std::string> a = {"run", "--method", method, "--index", index, "--queries",
                                      (testpaths::toy_dir() / "queries.tsv").string(), "--output", output};
        if (method == "keqe" || method == "csqe") {
            a.insert(a.end(), {"--backend", "mock", "--mock-fixtures", (testpaths::toy_dir() / "fixtures.json").string()});
        }
        return a;
    }

    fs::path dir;
    std::string index;
};

}  // namespace

TEST_F(CliTest, IndexAndSearch) {
    auto r = run({"search", "--index", index, "--query", "what causes tides", "--topk", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("tid"), std::string::npos);
    std::istringstream lines(r.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    EXPECT_EQ(n, 3);
    r = run({"search", "--index", index, "--query", "what causes tides", "--rm3", "--fb-docs", "3"});
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, Bm25RunWritesManifest) {
    auto out = (dir / "bm25.run").string();
    auto r = run(toy_run("bm25", out));
    ASSERT_EQ(r.code, 0) << r.err;
    auto manifest = nlohmann::json::parse(testpaths::slurp(out + ".manifest.json"));
    EXPECT_EQ(manifest["method"], "bm25");
    EXPECT_EQ(manifest["config"]["topk"], 1000);
    EXPECT_EQ(manifest["inputs"]["index"]["sha256"].get<std::string>().size(), 64u);
    EXPECT_EQ(manifest["timestamp"], "1970-01-01T00:00:00Z");
    auto text = testpaths::slurp(out);
    EXPECT_EQ(text.rfind("q1 Q0 ", 0), 0u);
    EXPECT_NE(text.find(" bm25\n"), std::string::npos);
}

TEST_F(CliTest, Rm3AndKeqeRuns) {
    for (std::string m : {"rm3", "keqe", "csqe"}) {
        auto r = run(toy_run(m, (dir / (m + ".run")).string()));
        EXPECT_EQ(r.code, 0) << m << ": " << r.err;
    }
}

TEST_F(CliTest, CsqeRunIsReproducible) {
    auto a = (dir / "a.run").string(), b = (dir / "b.run").string();
    ASSERT_EQ(run(toy_run("csqe", a)).code, 0);
    ASSERT_EQ(run(toy_run("csqe", b)).code, 0);
    EXPECT_EQ(testpaths::slurp(a), testpaths::slurp(b));
    auto ma = testpaths::slurp(a + ".manifest.json");
    EXPECT_EQ(ma, testpaths::slurp(b + ".manifest.json"));

    auto c = (dir / "c.run").string();
    auto r = run({"run", "--from-manifest", a + ".manifest.json", "--output", c});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(testpaths::slurp(c), testpaths::slurp(a));
    EXPECT_EQ(testpaths::slurp(c + ".manifest.json"), ma);
}

TEST_F(CliTest, ParallelJobsMatchSerial) {
    auto serial = (dir / "serial.run").string(), parallel = (dir / "parallel.run").string();
    ASSERT_EQ(run(toy_run("csqe", serial)).code, 0);
    auto args = toy_run("csqe", parallel);
    args.insert(args.end(), {"--jobs", "4"});
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(testpaths::slurp(serial), testpaths::slurp(parallel));
}

TEST_F(CliTest, WarmCacheNeedsNoFixtures) {
    auto cache = (dir / "cache").string();
    auto args = toy_run("csqe", (dir / "cold.run").string());
    args.insert(args.end(), {"--cache-dir", cache});
    ASSERT_EQ(run(args).code, 0);

    auto stats = run({"cache", "stats", "--cache-dir", cache});
    EXPECT_EQ(stats.code, 0);
    EXPECT_NE(stats.out.find("entries 20"), std::string::npos) << stats.out;

    // An empty fixture file would fail on any backend call.
    auto empty = (dir / "empty.json").string();
    std::ofstream(empty) << "{}";
    auto warm = toy_run("csqe", (dir / "warm.run").string());
    warm[warm.size() - 1] = empty;
    warm.insert(warm.end(), {"--cache-dir", cache});
    auto r = run(warm);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(testpaths::slurp(dir / "warm.run"), testpaths::slurp(dir / "cold.run"));

    auto cleared = run({"cache", "clear", "--cache-dir", cache});
    EXPECT_NE(cleared.out.find("removed 20"), std::string::npos);
    r = run(warm);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("no mock fixture"), std::string::npos);
}

TEST_F(CliTest, DumpPrompts) {
    auto dump = dir / "prompts";
    auto args = toy_run("csqe", (dir / "d.run").string());
    args.insert(args.end(), {"--dump-prompts", dump.string()});
    ASSERT_EQ(run(args).code, 0);
    EXPECT_TRUE(fs::exists(dump / "q1.csqe.prompt.txt"));
    EXPECT_TRUE(fs::exists(dump / "q1.keqe.response.1.txt"));
    EXPECT_TRUE(fs::exists(dump / "q5.query.txt"));
}

TEST_F(CliTest, UsageErrors) {
    auto r = run({"run", "--method", "csqe", "--queries", "q.tsv", "--output", "x"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--index"), std::string::npos);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);

    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"bogus"}).code, 1);
    EXPECT_EQ(run({"run", "--method", "dense"}).code, 1);
    auto args = toy_run("csqe", (dir / "x.run").string());
    args.insert(args.end(), {"--n-csqe", "0"});
    EXPECT_EQ(run(args).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
    auto help = run({"run", "--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("assumed default"), std::string::npos);
}

TEST_F(CliTest, DataErrors) {
    auto bad = (dir / "bad.jsonl").string();
    std::ofstream(bad) << "{\"id\":\"a\",\"contents\":\"x\"}\nnot json\n";
    auto r = run({"index", "--input", bad, "--output", (dir / "bad.idx").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos);

    auto qrels = (dir / "other.qrels").string();
    std::ofstream(qrels) << "zz 0 doc 1\n";
    auto out = (dir / "bm25.run").string();
    ASSERT_EQ(run(toy_run("bm25", out)).code, 0);
    r = run({"eval", "--run", out, "--qrels", qrels});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no query"), std::string::npos);

    r = run({"search", "--index", (dir / "missing.idx").string(), "--query", "x"});
    EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, RemoteBackendFailureIsExitThree) {
    auto args = toy_run("keqe", (dir / "r.run").string());
    args.resize(9);
    args.insert(args.end(), {"--backend", "remote", "--endpoint", "http://127.0.0.1:1/v1/chat/completions",
                             "--max-retries", "0", "--timeout", "1"});
    auto r = run(args);
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, EvalOutputs) {
    auto out = (dir / "bm25.run").string();
    ASSERT_EQ(run(toy_run("bm25", out)).code, 0);
    auto qrels = (testpaths::toy_dir() / "qrels.txt").string();
    auto r = run({"eval", "--run", out, "--qrels", qrels, "--metrics", "ndcg_cut.10,map", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto json = nlohmann::json::parse(r.out);
    EXPECT_EQ(json["evaluated"]["map"], 5);
    r = run({"eval", "--run", out, "--qrels", qrels, "--metrics", "bogus"});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, ConfigFilePrecedence) {
    auto cfg = (dir / "run.toml").string();
    std::ofstream(cfg) << "[run]\ntopk = 3\ntag = fromconfig\n";
    auto out = (dir / "c.run").string();
    auto args = toy_run("bm25", out);
    args.insert(args.begin(), {"--config", cfg});
    args.insert(args.end(), {"--tag", "fromflag"});
    ASSERT_EQ(run(args).code, 0);
    auto text = testpaths::slurp(out);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 15);  // 5 queries x topk 3
    EXPECT_NE(text.find("fromflag"), std::string::npos);
    EXPECT_EQ(text.find("fromconfig"), std::string::npos);
}
