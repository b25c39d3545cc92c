#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "csqe/error.hpp"
#include "csqe/expansion.hpp"
#include "csqe/log.hpp"

namespace csqe {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

struct Header {
    std::size_t number;
    std::string_view rest;  // text after the colon on the same line
};

// Matches `Document <n>:` with optional surrounding whitespace and markdown
// emphasis markers.
std::optional<Header> match_header(std::string_view line) {
    std::string_view s = line;
    auto skip = [&](auto pred) {
        while (!s.empty() && pred(s.front())) s.remove_prefix(1);
    };
    skip([](char c) { return is_space(c) || c == '*' || c == '#'; });
    constexpr std::string_view kWord = "document";
    if (s.size() < kWord.size()) return std::nullopt;
    for (std::size_t i = 0; i < kWord.size(); ++i)
        if (lower(s[i]) != kWord[i]) return std::nullopt;
    s.remove_prefix(kWord.size());
    skip(is_space);
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || ptr == s.data()) return std::nullopt;
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    skip(is_space);
    if (s.empty() || s.front() != ':') return std::nullopt;
    s.remove_prefix(1);
    skip([](char c) { return c == '*'; });
    return Header{n, trim(s)};
}

// Position and byte length of the next quote mark (ASCII or curly) at or
// after `from`.
std::pair<std::size_t, std::size_t> find_quote(std::string_view s, std::size_t from) {
    for (std::size_t i = from; i < s.size(); ++i) {
        if (s[i] == '"') return {i, 1};
        if (static_cast<unsigned char>(s[i]) == 0xE2 && i + 2 < s.size() &&
            static_cast<unsigned char>(s[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(s[i + 2]) == 0x9C || static_cast<unsigned char>(s[i + 2]) == 0x9D))
            return {i, 3};
    }
    return {std::string_view::npos, 0};
}

// Sentences on one content line: each quoted span, or the whole line when it
// carries no quotes.
std::vector<std::string> line_sentences(std::string_view line, bool& used_fallback) {
    std::vector<std::string> out;
    line = trim(line);
    if (line.empty()) return out;
    auto [open, open_len] = find_quote(line, 0);
    if (open == std::string_view::npos) {
        used_fallback = true;
        out.emplace_back(line);
        return out;
    }
    while (open != std::string_view::npos) {
        auto [close, close_len] = find_quote(line, open + open_len);
        std::size_t start = open + open_len;
        std::size_t end = close == std::string_view::npos ? line.size() : close;
        auto span = trim(line.substr(start, end - start));
        if (!span.empty()) out.emplace_back(span);
        if (close == std::string_view::npos) break;
        std::tie(open, open_len) = find_quote(line, close + close_len);
    }
    return out;
}

}  // namespace

ExtractionResult parse_csqe_response(std::string_view raw, std::size_t k) {
    ExtractionResult result;
    result.raw_response = std::string(raw);

    std::unordered_set<std::string> seen_sentences;
    std::unordered_set<std::size_t> seen_ordinals;
    enum class State { Preamble, InDocument, Skipping } state = State::Preamble;

    auto take = [&](std::string_view content) {
        bool fallback = false;
        for (auto& s : line_sentences(content, fallback)) {
            if (fallback) result.warnings.push_back("unquoted line taken as a sentence: " + s);
            if (seen_sentences.insert(s).second) result.sentences.push_back(std::move(s));
        }
    };

    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) nl = raw.size();
        std::string_view line = raw.substr(pos, nl - pos);
        pos = nl + 1;

        if (auto header = match_header(line)) {
            if (header->number >= 1 && header->number <= k) {
                state = State::InDocument;
                if (seen_ordinals.insert(header->number).second)
                    result.relevant_doc_ordinals.push_back(header->number);
                take(header->rest);
            } else {
                state = State::Skipping;
                result.warnings.push_back("ignoring out-of-range header Document " +
                                          std::to_string(header->number) + " (k=" + std::to_string(k) + ")");
            }
            continue;
        }
        if (state == State::InDocument) take(line);
    }
    for (const auto& w : result.warnings) log::warn("csqe response: {}", w);
    return result;
}

double verify_extraction(const std::vector<std::string>& sentences, const std::vector<std::string>& docs) {
    if (sentences.empty()) return 1.0;
    std::vector<std::string> norm_docs;
    norm_docs.reserve(docs.size());
    for (const auto& d : docs) norm_docs.push_back(normalize_whitespace(d));
    std::size_t verbatim = 0;
    for (const auto& s : sentences) {
        auto ns = normalize_whitespace(s);
        bool found = std::any_of(norm_docs.begin(), norm_docs.end(),
                                 [&](const std::string& d) { return d.find(ns) != std::string::npos; });
        if (found) ++verbatim;
    }
    return static_cast<double>(verbatim) / static_cast<double>(sentences.size());
}

ExpandedQuery compose_expanded_query(std::string_view query, std::vector<std::string> expansions) {
    if (query.empty()) throw ConfigError("cannot expand an empty query");
    ExpandedQuery out;
    out.original = std::string(query);
    if (expansions.empty()) {
        out.composed = out.original;
        return out;
    }
    for (std::size_t i = 0; i < expansions.size(); ++i) {
        if (i) out.composed.push_back(' ');
        out.composed += query;
    }
    for (const auto& e : expansions) {
        out.composed.push_back(' ');
        out.composed += e;
    }
    out.expansions = std::move(expansions);
    return out;
}

}  // namespace csqe
