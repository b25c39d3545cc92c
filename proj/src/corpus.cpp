#include "csqe/corpus.hpp"

#include <algorithm>
#include <istream>
#include <string>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "csqe/error.hpp"
#include "csqe/porter_stemmer.hpp"

namespace csqe {
namespace detail {
extern const std::string_view kBundledStopwords;
}

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alnum_ascii(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char to_lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::unordered_set<std::string> parse_stopwords(std::string_view contents) {
    std::unordered_set<std::string> words;
    std::size_t pos = 0;
    while (pos <= contents.size()) {
        std::size_t nl = contents.find('\n', pos);
        if (nl == std::string_view::npos) nl = contents.size();
        std::string_view line = trim(contents.substr(pos, nl - pos));
        if (!line.empty() && line.front() != '#') {
            std::string w(line);
            std::transform(w.begin(), w.end(), w.begin(), to_lower_ascii);
            words.insert(std::move(w));
        }
        pos = nl + 1;
    }
    return words;
}

const nlohmann::json* find_string_field(const nlohmann::json& obj, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        auto it = obj.find(key);
        if (it != obj.end()) return &*it;
    }
    return nullptr;
}

}  // namespace

std::vector<Document> parse_jsonl_corpus(std::istream& in) {
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw DataError("expected a JSON object", line_no);

        const auto* id = find_string_field(obj, {"id", "_id"});
        if (!id || !id->is_string() || id->get_ref<const std::string&>().empty())
            throw DataError("missing or non-string \"id\"", line_no);
        const auto* contents = find_string_field(obj, {"contents", "text"});
        if (!contents || !contents->is_string())
            throw DataError("missing or non-string \"contents\"", line_no);

        Document doc;
        doc.id = id->get<std::string>();
        doc.text = contents->get<std::string>();
        if (auto it = obj.find("title"); it != obj.end()) {
            if (!it->is_string()) throw DataError("non-string \"title\"", line_no);
            const auto& title = it->get_ref<const std::string&>();
            if (!title.empty()) doc.text = title + " " + doc.text;
        }
        if (!seen.insert(doc.id).second) throw DataError("duplicate document id \"" + doc.id + "\"", line_no);
        docs.push_back(std::move(doc));
    }
    return docs;
}

void write_jsonl_corpus(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) {
        nlohmann::json obj = {{"id", d.id}, {"contents", d.text}};
        out << obj.dump() << '\n';
    }
}

std::vector<Query> parse_queries_tsv(std::istream& in) {
    std::vector<Query> queries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("expected qid<TAB>text", line_no);
        Query q;
        q.id = std::string(trim(std::string_view(line).substr(0, tab)));
        q.text = std::string(trim(std::string_view(line).substr(tab + 1)));
        if (q.id.empty()) throw DataError("empty query id", line_no);
        if (q.text.empty()) throw DataError("empty query text for \"" + q.id + "\"", line_no);
        if (!seen.insert(q.id).second) throw DataError("duplicate query id \"" + q.id + "\"", line_no);
        queries.push_back(std::move(q));
    }
    return queries;
}

Analyzer::Analyzer() : stopwords_(parse_stopwords(detail::kBundledStopwords)) {}

Analyzer::Analyzer(std::unordered_set<std::string> stopwords) : stopwords_(std::move(stopwords)) {}

Analyzer Analyzer::from_stopword_file(std::istream& in) {
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return Analyzer(parse_stopwords(contents));
}

bool Analyzer::is_stopword(std::string_view term) const {
    return stopwords_.find(std::string(term)) != stopwords_.end();
}

TokenStream Analyzer::tokenize(std::string_view text) const {
    TokenStream out;
    for (auto& tok : split_alnum_lower(text)) {
        if (stopwords_.count(tok)) continue;
        out.push_back(porter_stem(tok));
    }
    return out;
}

const Analyzer& default_analyzer() {
    static const Analyzer analyzer;
    return analyzer;
}

TokenStream tokenize(std::string_view text) { return default_analyzer().tokenize(text); }

TokenStream split_alnum_lower(std::string_view text) {
    TokenStream out;
    std::string cur;
    for (char c : text) {
        if (is_alnum_ascii(c)) {
            cur.push_back(to_lower_ascii(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> pieces;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) pieces.push_back(text.substr(start, i - start));
    }
    return pieces;
}

std::string truncate_whitespace_tokens(std::string_view text, std::size_t max_tokens) {
    if (max_tokens == 0) throw ConfigError("token budget must be at least 1");
    auto pieces = split_whitespace(text);
    if (pieces.size() > max_tokens) pieces.resize(max_tokens);
    std::string out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i) out.push_back(' ');
        out.append(pieces[i]);
    }
    return out;
}

std::string normalize_whitespace(std::string_view text) {
    return truncate_whitespace_tokens(text, std::max<std::size_t>(1, text.size()));
}

std::string_view bundled_stopword_list() { return detail::kBundledStopwords; }

}  // namespace csqe
