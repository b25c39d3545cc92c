#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace csqe {

/// A corpus unit. `text` is the title and body joined by one space when the
/// source record carries a title.
struct Document {
    std::string id;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Query {
    std::string id;
    std::string text;

    friend bool operator==(const Query&, const Query&) = default;
};

/// Normalized tokens: non-empty, lowercase ASCII letters and digits only.
using TokenStream = std::vector<std::string>;

/// Reads one JSON object per line with string fields "id" and "contents"
/// (optional "title"). Blank lines are skipped. Throws DataError on malformed
/// lines or duplicate ids.
std::vector<Document> parse_jsonl_corpus(std::istream& in);

/// Inverse of parse_jsonl_corpus: one {"id","contents"} object per line.
void write_jsonl_corpus(std::ostream& out, const std::vector<Document>& docs);

/// Reads `qid<TAB>text` lines. Blank lines are skipped.
std::vector<Query> parse_queries_tsv(std::istream& in);

/// Lowercase, split on non-alphanumerics, drop stopwords, Porter-stem.
class Analyzer {
public:
    /// Uses the bundled English stopword list.
    Analyzer();
    explicit Analyzer(std::unordered_set<std::string> stopwords);

    /// One word per line; blank lines and lines starting with '#' are ignored.
    static Analyzer from_stopword_file(std::istream& in);

    TokenStream tokenize(std::string_view text) const;

    bool is_stopword(std::string_view term) const;
    const std::unordered_set<std::string>& stopwords() const noexcept { return stopwords_; }

private:
    std::unordered_set<std::string> stopwords_;
};

/// The analyzer shared by indexing and querying.
const Analyzer& default_analyzer();

/// Shorthand for default_analyzer().tokenize(text).
TokenStream tokenize(std::string_view text);

/// Lowercase and split only; no stopword removal or stemming.
TokenStream split_alnum_lower(std::string_view text);

/// Keeps the first `max_tokens` whitespace-separated pieces, rejoined with
/// single spaces. Throws ConfigError when max_tokens is 0.
std::string truncate_whitespace_tokens(std::string_view text, std::size_t max_tokens);

/// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// The bundled stopword list file contents, one word per line.
std::string_view bundled_stopword_list();

}  // namespace csqe
