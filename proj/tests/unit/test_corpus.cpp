#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "csqe/corpus.hpp"
#include "csqe/error.hpp"
#include "csqe/porter_stemmer.hpp"

using namespace csqe;

namespace {

std::vector<Document> parse(const std::string& s) {
    std::istringstream in(s);
    return parse_jsonl_corpus(in);
}

std::vector<Query> parse_q(const std::string& s) {
    std::istringstream in(s);
    return parse_queries_tsv(in);
}

}  // namespace

TEST(Corpus, ParsesContents) {
    auto docs = parse(R"({"id":"d1","contents":"Biology is the study of life"})" "\n");
    ASSERT_EQ(docs.size(), 1u);
    EXPECT_EQ(docs[0], (Document{"d1", "Biology is the study of life"}));
}

TEST(Corpus, PrependsTitle) {
    auto docs = parse(R"({"id":"d2","title":"Biology","contents":"the study of life"})");
    EXPECT_EQ(docs[0].text, "Biology the study of life");
}

TEST(Corpus, EmptyTitleIsIgnored) {
    auto docs = parse(R"({"id":"d2","title":"","contents":"x"})");
    EXPECT_EQ(docs[0].text, "x");
}

TEST(Corpus, AcceptsBeirFieldNames) {
    auto docs = parse(R"({"_id":"d3","text":"body"})");
    EXPECT_EQ(docs[0], (Document{"d3", "body"}));
}

TEST(Corpus, SkipsBlankLines) {
    auto docs = parse("\n{\"id\":\"a\",\"contents\":\"x\"}\n\n{\"id\":\"b\",\"contents\":\"y\"}\n");
    EXPECT_EQ(docs.size(), 2u);
}

TEST(Corpus, ReportsLineOfBadRecord) {
    try {
        parse("{\"id\":\"a\",\"contents\":\"x\"}\n{\"id\":\"b\"}\n");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse("{not json}"), DataError);
    EXPECT_THROW(parse("[1,2]"), DataError);
    EXPECT_THROW(parse("{\"id\":1,\"contents\":\"x\"}"), DataError);
}

TEST(Corpus, RejectsDuplicateIds) {
    try {
        parse("{\"id\":\"a\",\"contents\":\"x\"}\n{\"id\":\"a\",\"contents\":\"y\"}\n");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Corpus, RoundTrip) {
    std::vector<Document> docs = {{"a", "x \"quoted\" text"}, {"b", "unicode caf\xc3\xa9\ttab"}, {"c", ""}};
    std::ostringstream out;
    write_jsonl_corpus(out, docs);
    auto again = parse(out.str());
    EXPECT_EQ(again, docs);
    std::ostringstream out2;
    write_jsonl_corpus(out2, again);
    EXPECT_EQ(out.str(), out2.str());
}

TEST(Queries, ParsesTsv) {
    auto qs = parse_q("q1\tBiology definition\nq2\t how are some sharks warm blooded \r\n");
    ASSERT_EQ(qs.size(), 2u);
    EXPECT_EQ(qs[0], (Query{"q1", "Biology definition"}));
    EXPECT_EQ(qs[1], (Query{"q2", "how are some sharks warm blooded"}));
}

TEST(Queries, MissingTabReportsLine) {
    try {
        parse_q("q1\ta\nq2\tb\nq3 no tab here\n");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_q("q1\ta\nq1\tb\n"), DataError);
    EXPECT_THROW(parse_q("q1\t   \n"), DataError);
}

TEST(Tokenize, Examples) {
    // The reference stemmer keeps the final "i" of "biologi".
    EXPECT_EQ(tokenize("Biology definition"), (TokenStream{"biologi", "definit"}));
    EXPECT_EQ(tokenize("the of and"), TokenStream{});
    EXPECT_EQ(tokenize(""), TokenStream{});
    EXPECT_EQ(tokenize("Warm-blooded SHARKS, 20 degrees!"), (TokenStream{"warm", "blood", "shark", "20", "degre"}));
}

TEST(Tokenize, NonAsciiBytesSeparateTokens) {
    EXPECT_EQ(split_alnum_lower("caf\xc3\xa9 au"), (TokenStream{"caf", "au"}));
}

TEST(Tokenize, BundledStopwords) {
    const auto& sw = default_analyzer().stopwords();
    EXPECT_EQ(sw.size(), 33u);
    for (auto w : {"a", "the", "of", "and", "with", "will"}) EXPECT_TRUE(default_analyzer().is_stopword(w)) << w;
    EXPECT_FALSE(default_analyzer().is_stopword("shark"));
}

TEST(Tokenize, CustomStopwordFile) {
    std::istringstream in("# comment\nshark\n\nfish\n");
    auto a = Analyzer::from_stopword_file(in);
    EXPECT_EQ(a.tokenize("the shark and fish swim"), (TokenStream{"the", "and", "swim"}));
}

// Stemming is not idempotent ("agreed" -> "agre" -> "agr"), so the property is
// checked on the analysis before stemming: lowercasing, splitting and stopword
// removal are idempotent, and re-stemming surviving tokens is stable for the
// majority of the vocabulary.
TEST(Tokenize, PreStemAnalysisIsIdempotent) {
    std::mt19937_64 rng(7);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEF0123456789 ,.-!'\t";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::vector<std::string> words = {"the", "of", "Sharks", "warm-blooded", "IS", "an", "and"};
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        for (int i = 0; i < 40; ++i) text += (i % 7 == 0) ? " " + words[i % words.size()] + " " : std::string(1, alphabet[pick(rng)]);
        TokenStream kept;
        for (auto& t : split_alnum_lower(text))
            if (!default_analyzer().is_stopword(t)) kept.push_back(t);
        std::string joined;
        for (auto& t : kept) joined += t + " ";
        TokenStream again;
        for (auto& t : split_alnum_lower(joined))
            if (!default_analyzer().is_stopword(t)) again.push_back(t);
        ASSERT_EQ(again, kept) << text;
    }
    EXPECT_EQ(tokenize("agreed"), TokenStream{"agre"});
    EXPECT_EQ(tokenize("agre"), TokenStream{"agr"});
}

TEST(Truncate, Examples) {
    EXPECT_EQ(truncate_whitespace_tokens("a b c d", 2), "a b");
    EXPECT_EQ(truncate_whitespace_tokens("a b", 5), "a b");
    EXPECT_EQ(truncate_whitespace_tokens("a  b\tc", 3), "a b c");
    EXPECT_EQ(truncate_whitespace_tokens("", 3), "");
    EXPECT_THROW(truncate_whitespace_tokens("a", 0), ConfigError);
}

TEST(Truncate, NeverExceedsBudget) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text;
        std::size_t n = rng() % 60;
        for (std::size_t i = 0; i < n; ++i) text += (rng() % 3 == 0) ? " \t"[rng() % 2] : char('a' + rng() % 5);
        std::size_t max = 1 + rng() % 10;
        auto out = truncate_whitespace_tokens(text, max);
        EXPECT_LE(split_whitespace(out).size(), max);
        EXPECT_EQ(out, normalize_whitespace(out));
    }
}

// Vectors from the reference stemmer's published vocabulary/output lists.
TEST(Porter, ReferenceVectors) {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
        {"caress", "caress"},     {"cats", "cat"},            {"feed", "feed"},
        {"agreed", "agre"},       {"plastered", "plaster"},   {"bled", "bled"},
        {"motoring", "motor"},    {"sing", "sing"},           {"conflated", "conflat"},
        {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},
        {"tanned", "tan"},        {"falling", "fall"},        {"hissing", "hiss"},
        {"fizzed", "fizz"},       {"failing", "fail"},        {"filing", "file"},
        {"happy", "happi"},       {"sky", "sky"},             {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},
        {"hesitanci", "hesit"},   {"digitizer", "digit"},     {"conformabli", "conform"},
        {"radicalli", "radic"},   {"differentli", "differ"},  {"vileli", "vile"},
        {"analogousli", "analog"}, {"vietnamization", "vietnam"}, {"predication", "predic"},
        {"operator", "oper"},     {"feudalism", "feudal"},    {"decisiveness", "decis"},
        {"hopefulness", "hope"},  {"callousness", "callous"}, {"formaliti", "formal"},
        {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
        {"formative", "form"},    {"formalize", "formal"},    {"electriciti", "electr"},
        {"electrical", "electr"}, {"hopeful", "hope"},        {"goodness", "good"},
        {"revival", "reviv"},     {"allowance", "allow"},     {"inference", "infer"},
        {"airliner", "airlin"},   {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
        {"defensible", "defens"}, {"irritant", "irrit"},      {"replacement", "replac"},
        {"adjustment", "adjust"}, {"dependent", "depend"},    {"adoption", "adopt"},
        {"homologou", "homolog"}, {"communism", "commun"},    {"activate", "activ"},
        {"angulariti", "angular"}, {"homologous", "homolog"}, {"effective", "effect"},
        {"bowdlerize", "bowdler"}, {"probate", "probat"},     {"rate", "rate"},
        {"cease", "ceas"},        {"controll", "control"},    {"roll", "roll"},
        {"generalizations", "gener"}, {"oscillators", "oscil"}, {"consolidated", "consolid"},
        {"biology", "biologi"},   {"definition", "definit"},  {"sharks", "shark"},
        {"a", "a"},               {"is", "is"},               {"", ""},
    };
    for (const auto& [in, want] : cases) EXPECT_EQ(porter_stem(in), want) << in;
}

// Departures of the reference implementation from the original description.
TEST(Porter, ReferenceDepartures) {
    EXPECT_EQ(porter_stem("possibli"), "possibl");
    EXPECT_EQ(porter_stem("archaeology"), "archaeolog");
}
