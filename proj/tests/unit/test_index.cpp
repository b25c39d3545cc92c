#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "csqe/error.hpp"
#include "csqe/index.hpp"
#include "oracles.hpp"

using namespace csqe;

namespace {

InvertedIndex toy() { return build_index({{"d1", "shark shark"}, {"d2", "shark warm"}, {"d3", "cold"}}); }

std::vector<Document> to_documents(const std::vector<oracle::Doc>& docs) {
    std::vector<Document> out;
    for (const auto& d : docs) out.push_back({d.id, oracle::join(d.tokens)});
    return out;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Index, Statistics) {
    auto ix = toy();
    EXPECT_EQ(ix.doc_count(), 3u);
    EXPECT_DOUBLE_EQ(ix.avg_doc_len(), 5.0 / 3.0);
    EXPECT_EQ(ix.df("shark"), 2u);
    EXPECT_EQ(ix.df("nothing"), 0u);
    EXPECT_EQ(ix.tf("shark", 0), 2u);
    EXPECT_EQ(ix.vocabulary_size(), 3u);
    EXPECT_DOUBLE_EQ(ix.idf("shark"), std::log(1.0 + (3 - 2 + 0.5) / (2 + 0.5)));
    EXPECT_EQ(ix.params(), (Bm25Params{0.9, 0.4}));
}

TEST(Index, ToyRanking) {
    auto hits = toy().search("shark", 10);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].doc_id, "d1");
    EXPECT_EQ(hits[1].doc_id, "d2");
    EXPECT_GT(hits[0].score, hits[1].score);
}

TEST(Index, TermScoreMatchesFormula) {
    auto ix = toy();
    const double avgdl = 5.0 / 3.0;
    const double idf = std::log(1.0 + 1.5 / 2.5);
    double want = idf * 2 * 1.9 / (2 + 0.9 * (0.6 + 0.4 * 2 / avgdl));
    EXPECT_NEAR(bm25_term_score(ix, "shark", 0), want, 1e-12);
    EXPECT_EQ(bm25_term_score(ix, "shark", 2), 0.0);
    EXPECT_EQ(bm25_term_score(ix, "absent", 0), 0.0);
}

TEST(Index, RepeatedQueryTermsCountTwice) {
    auto ix = toy();
    auto once = ix.search("shark", 1)[0].score;
    auto twice = ix.search("shark shark", 1)[0].score;
    EXPECT_NEAR(twice, 2 * once, 1e-12);
}

TEST(Index, WeightedQuery) {
    auto ix = toy();
    auto hits = search_weighted(ix, WeightedQuery{{{"shark", 1.0}, {"cold", 10.0}}}, 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].doc_id, "d3");
    EXPECT_THROW(ix.search_weighted(WeightedQuery{{{"shark", -1.0}}}, 3), ConfigError);
    EXPECT_THROW(ix.search_weighted(WeightedQuery{{{"shark", 0.0}}}, 3), ConfigError);
    EXPECT_THROW(ix.search_weighted(WeightedQuery{{{"shark", NAN}}}, 3), ConfigError);
}

TEST(Index, EdgeCases) {
    auto ix = toy();
    EXPECT_TRUE(ix.search("the of", 10).empty());
    EXPECT_TRUE(ix.search("unknown words", 10).empty());
    EXPECT_EQ(ix.search("shark", 1).size(), 1u);
    EXPECT_THROW(ix.search("shark", 0), ConfigError);
    EXPECT_THROW(build_index({}), DataError);
    EXPECT_THROW(build_index({{"a", "x"}, {"a", "y"}}), DataError);
    EXPECT_THROW(build_index({{"", "x"}}), DataError);
}

TEST(Index, TiesBreakByDocId) {
    auto ix = build_index({{"z", "fish"}, {"a", "fish"}, {"m", "fish"}});
    auto hits = ix.search("fish", 3);
    EXPECT_EQ(hits[0].doc_id, "a");
    EXPECT_EQ(hits[1].doc_id, "m");
    EXPECT_EQ(hits[2].doc_id, "z");
}

TEST(Index, EmptyDocumentsAreIndexed) {
    auto ix = build_index({{"a", "the of"}, {"b", "fish"}});
    EXPECT_EQ(ix.doc_len(0), 0u);
    EXPECT_EQ(ix.search("fish", 5).size(), 1u);
}

TEST(Index, MatchesOracleOnRandomCorpora) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        auto c = oracle::random_case(rng);
        auto ix = build_index(to_documents(c.docs));
        auto got = ix.search(oracle::join(c.query), c.docs.size());
        auto want = oracle::bm25(c.docs, c.query);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            ASSERT_TRUE(close(got[i].score, want[i].score)) << trial << " rank " << i;
        }
        for (const auto& h : want) {
            auto it = std::find_if(got.begin(), got.end(), [&](const ScoredHit& g) { return g.doc_id == h.id; });
            ASSERT_NE(it, got.end());
            ASSERT_TRUE(close(it->score, h.score));
        }
        ASSERT_TRUE(std::is_sorted(got.begin(), got.end(), ranks_before));
    }
}

TEST(Index, CustomParameters) {
    std::mt19937_64 rng(99);
    auto c = oracle::random_case(rng);
    auto ix = build_index(to_documents(c.docs), {1.2, 0.75});
    auto got = ix.search(oracle::join(c.query), 1000);
    auto want = oracle::bm25(c.docs, c.query, 1.2, 0.75);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_TRUE(close(got[i].score, want[i].score));
    auto swapped = ix.with_params({0.9, 0.4});
    auto base = oracle::bm25(c.docs, c.query);
    auto again = swapped.search(oracle::join(c.query), 1000);
    for (std::size_t i = 0; i < again.size(); ++i) EXPECT_TRUE(close(again[i].score, base[i].score));
}

TEST(IndexIo, RoundTrip) {
    std::mt19937_64 rng(5);
    auto c = oracle::random_case(rng);
    auto ix = build_index(to_documents(c.docs), {1.1, 0.3});
    std::stringstream buf;
    ix.save(buf);
    auto loaded = InvertedIndex::load(buf);
    EXPECT_EQ(loaded.params(), ix.params());
    EXPECT_EQ(loaded.doc_count(), ix.doc_count());
    EXPECT_EQ(loaded.terms(), ix.terms());
    for (std::uint32_t d = 0; d < ix.doc_count(); ++d) {
        EXPECT_EQ(loaded.doc_id(d), ix.doc_id(d));
        EXPECT_EQ(loaded.doc_text(d), ix.doc_text(d));
        EXPECT_EQ(loaded.doc_terms(d), ix.doc_terms(d));
    }
    auto q = oracle::join(c.query);
    EXPECT_EQ(loaded.search(q, 50), ix.search(q, 50));

    std::stringstream again;
    loaded.save(again);
    std::stringstream first;
    ix.save(first);
    EXPECT_EQ(again.str(), first.str());
}

TEST(IndexIo, RejectsCorruptFiles) {
    std::stringstream buf;
    toy().save(buf);
    const auto bytes = buf.str();
    for (std::size_t cut : {std::size_t{0}, std::size_t{4}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
        std::stringstream in(bytes.substr(0, cut));
        EXPECT_THROW(InvertedIndex::load(in), DataError) << cut;
    }
    auto bad = bytes;
    bad[0] = 'X';
    std::stringstream in(bad);
    EXPECT_THROW(InvertedIndex::load(in), DataError);
    EXPECT_THROW(InvertedIndex::load_file("/nonexistent/index.bin"), DataError);
}

TEST(Index, ConcurrentSearchesAgree) {
    std::mt19937_64 rng(77);
    auto c = oracle::random_case(rng, 20, 8);
    auto ix = build_index(to_documents(c.docs));
    auto q = oracle::join(c.query);
    auto want = ix.search(q, 100);
    std::vector<std::jthread> threads;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&] {
            for (int i = 0; i < 200; ++i)
                if (ix.search(q, 100) != want) mismatches++;
        });
    threads.clear();
    EXPECT_EQ(mismatches.load(), 0);
}
