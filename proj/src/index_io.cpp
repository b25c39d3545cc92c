// Binary index layout (all integers little-endian):
//
//   magic    8 bytes  "CSQEIDX\0"
//   version  u32      kFormatVersion
//   k1, b    f64, f64
//   docs     u64 count, then per doc: str id, str text, u32 length
//   terms    u64 count, then per term: str term, u64 df, df x (u32 doc, u32 tf)
//
// where str is a u64 byte length followed by the bytes.

#include <bit>
#include <cstring>
#include <fstream>

#include "csqe/error.hpp"
#include "csqe/index.hpp"

namespace csqe {
namespace {

constexpr char kMagic[8] = {'C', 'S', 'Q', 'E', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::ostream& out, const std::string& s) {
    put_le<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <typename T>
    T le() {
        unsigned char buf[sizeof(T)];
        bytes(reinterpret_cast<char*>(buf), sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return static_cast<T>(v);
    }

    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

    std::string str() {
        auto n = le<std::uint64_t>();
        if (n > (1ull << 32)) throw DataError("index file corrupt: implausible string length");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

    void bytes(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("index file truncated");
    }

private:
    std::istream& in_;
};

}  // namespace

void InvertedIndex::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put_le(out, kFormatVersion);
    put_f64(out, params_.k1);
    put_f64(out, params_.b);
    put_le<std::uint64_t>(out, doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        put_str(out, doc_ids_[i]);
        put_str(out, doc_texts_[i]);
        put_le(out, doc_len_[i]);
    }
    put_le<std::uint64_t>(out, terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        put_str(out, terms_[t]);
        put_le<std::uint64_t>(out, postings_[t].size());
        for (const auto& p : postings_[t]) {
            put_le(out, p.doc);
            put_le(out, p.tf);
        }
    }
    if (!out) throw Error("failed writing index");
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    Reader r(in);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("not an index file (bad magic)");
    auto version = r.le<std::uint32_t>();
    if (version != kFormatVersion)
        throw DataError("unsupported index format version " + std::to_string(version));

    InvertedIndex idx;
    idx.params_.k1 = r.f64();
    idx.params_.b = r.f64();

    auto n_docs = r.le<std::uint64_t>();
    if (n_docs == 0 || n_docs > 0xFFFFFFFFull) throw DataError("index file corrupt: bad document count");
    std::vector<std::uint64_t> len_check(n_docs, 0);
    for (std::uint64_t i = 0; i < n_docs; ++i) {
        idx.doc_ids_.push_back(r.str());
        idx.doc_texts_.push_back(r.str());
        idx.doc_len_.push_back(r.le<std::uint32_t>());
    }

    auto n_terms = r.le<std::uint64_t>();
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        auto term = r.str();
        if (!idx.terms_.empty() && !(idx.terms_.back() < term))
            throw DataError("index file corrupt: vocabulary not sorted");
        auto df = r.le<std::uint64_t>();
        if (df == 0 || df > n_docs) throw DataError("index file corrupt: bad document frequency");
        std::vector<Posting> list;
        list.reserve(df);
        for (std::uint64_t i = 0; i < df; ++i) {
            Posting p{r.le<std::uint32_t>(), r.le<std::uint32_t>()};
            if (p.doc >= n_docs || p.tf == 0 || (!list.empty() && list.back().doc >= p.doc))
                throw DataError("index file corrupt: bad posting");
            len_check[p.doc] += p.tf;
            list.push_back(p);
        }
        idx.terms_.push_back(std::move(term));
        idx.postings_.push_back(std::move(list));
    }
    for (std::uint64_t i = 0; i < n_docs; ++i)
        if (len_check[i] != idx.doc_len_[i]) throw DataError("index file corrupt: document length mismatch");

    idx.finalize();
    if (idx.doc_ordinals_.size() != idx.doc_ids_.size()) throw DataError("index file corrupt: duplicate ids");
    return idx;
}

InvertedIndex InvertedIndex::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index file " + path);
    return load(in);
}

void InvertedIndex::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    save(out);
}

}  // namespace csqe
