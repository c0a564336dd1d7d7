#pragma once

// Okapi BM25 over an in-memory inverted index.
//
//   score(q, d) = sum_t qtf(t) * idf(t) * tf(t,d) * (k1 + 1)
//                 / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))
//   idf(t)      = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
//
// The idf form is never negative, so neither is any score.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jurisrank/binary_format.hpp"
#include "jurisrank/corpus.hpp"
#include "jurisrank/document.hpp"
#include "jurisrank/errors.hpp"
#include "jurisrank/io.hpp"

namespace jurisrank {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const {
        if (!(k1 >= 0.0) || !std::isfinite(k1)) throw std::invalid_argument("BM25 k1 must be a finite value >= 0");
        if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("BM25 b must lie in [0, 1]");
    }
};

struct Posting {
    std::uint32_t doc = 0;  // ordinal into InvertedIndex::docs()
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct ScoredDoc {
    DocId doc;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

class InvertedIndex {
public:
    using PostingMap = std::map<std::string, std::vector<Posting>, std::less<>>;

    InvertedIndex() = default;

    /// Takes ownership of already-built parts. Checks every structural
    /// invariant and throws FormatError on violation.
    InvertedIndex(std::vector<DocId> docs, std::vector<std::uint32_t> doc_len, PostingMap postings)
        : docs_(std::move(docs)), doc_len_(std::move(doc_len)), postings_(std::move(postings)) {
        if (docs_.size() != doc_len_.size()) throw FormatError("index: document and length tables differ in size");
        if (docs_.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("index: too many documents");
        for (std::size_t i = 1; i < docs_.size(); ++i) {
            if (!(docs_[i - 1] < docs_[i])) throw FormatError("index: documents not strictly ordered by id");
        }
        std::vector<std::uint64_t> counted(docs_.size(), 0);
        for (const auto& [term, list] : postings_) {
            if (list.empty()) throw FormatError("index: empty posting list for '" + term + "'");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const auto& p = list[i];
                if (p.doc >= docs_.size()) throw FormatError("index: posting references unknown document");
                if (p.tf == 0) throw FormatError("index: zero term frequency");
                if (i > 0 && list[i - 1].doc >= p.doc) throw FormatError("index: posting list not ascending");
                counted[p.doc] += p.tf;
            }
        }
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            if (counted[i] != doc_len_[i]) throw FormatError("index: document length disagrees with postings");
            total += doc_len_[i];
        }
        avgdl_ = docs_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs_.size());
    }

    [[nodiscard]] std::size_t n_docs() const noexcept { return docs_.size(); }
    [[nodiscard]] double avgdl() const noexcept { return avgdl_; }
    [[nodiscard]] const std::vector<DocId>& docs() const noexcept { return docs_; }
    [[nodiscard]] const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_len_; }
    [[nodiscard]] const PostingMap& postings() const noexcept { return postings_; }
    [[nodiscard]] std::size_t vocabulary_size() const noexcept { return postings_.size(); }

    [[nodiscard]] std::span<const Posting> postings(std::string_view term) const {
        auto it = postings_.find(term);
        if (it == postings_.end()) return {};
        return it->second;
    }

    [[nodiscard]] std::size_t df(std::string_view term) const { return postings(term).size(); }

    [[nodiscard]] std::optional<std::uint32_t> ordinal(const DocId& id) const {
        auto it = std::lower_bound(docs_.begin(), docs_.end(), id);
        if (it == docs_.end() || !(*it == id)) return std::nullopt;
        return static_cast<std::uint32_t>(it - docs_.begin());
    }

    [[nodiscard]] std::uint32_t doc_len(const DocId& id) const {
        auto ord = ordinal(id);
        if (!ord) throw UnknownDocumentError("document '" + id.label + "' is not in the index");
        return doc_len_[*ord];
    }

    /// Term frequency of `term` in document ordinal `doc`, 0 when absent.
    [[nodiscard]] std::uint32_t tf(std::string_view term, std::uint32_t doc) const {
        auto list = postings(term);
        auto it = std::lower_bound(list.begin(), list.end(), doc,
                                   [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        return (it != list.end() && it->doc == doc) ? it->tf : 0;
    }

    friend bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
        return a.docs_ == b.docs_ && a.doc_len_ == b.doc_len_ && a.postings_ == b.postings_;
    }

private:
    std::vector<DocId> docs_;
    std::vector<std::uint32_t> doc_len_;
    PostingMap postings_;
    double avgdl_ = 0.0;
};

/// Builds the index; documents are re-ordered by id. Throws EmptyCorpusError
/// when there is nothing to index.
inline InvertedIndex build_index(std::span<const NormalizedDocument> documents) {
    if (documents.empty()) throw EmptyCorpusError();
    std::vector<const NormalizedDocument*> sorted;
    sorted.reserve(documents.size());
    for (const auto& d : documents) sorted.push_back(&d);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i - 1]->id == sorted[i]->id) {
            throw FormatError("duplicate document label '" + sorted[i]->id.label + "'");
        }
    }

    std::vector<DocId> docs;
    std::vector<std::uint32_t> lengths;
    InvertedIndex::PostingMap postings;
    docs.reserve(sorted.size());
    lengths.reserve(sorted.size());
    for (std::size_t ord = 0; ord < sorted.size(); ++ord) {
        const auto& d = *sorted[ord];
        docs.push_back(d.id);
        lengths.push_back(static_cast<std::uint32_t>(d.terms.size()));
        std::map<std::string_view, std::uint32_t> counts;
        for (const auto& t : d.terms) ++counts[t];
        for (const auto& [term, tf] : counts) {
            auto it = postings.find(term);
            if (it == postings.end()) it = postings.emplace(std::string(term), std::vector<Posting>{}).first;
            it->second.push_back(Posting{static_cast<std::uint32_t>(ord), tf});
        }
    }
    return InvertedIndex(std::move(docs), std::move(lengths), std::move(postings));
}

inline InvertedIndex build_index(const Corpus& corpus) { return build_index(corpus.documents()); }

inline double idf(std::size_t n_docs, std::size_t df) {
    const double n = static_cast<double>(n_docs);
    const double d = static_cast<double>(df);
    return std::log1p((n - d + 0.5) / (d + 0.5));
}

/// idf of a term as seen by the index; unseen terms get 0 because they
/// contribute nothing to any score.
inline double idf(std::string_view term, const InvertedIndex& index) {
    const std::size_t df = index.df(term);
    if (df == 0) return 0.0;
    return idf(index.n_docs(), df);
}

namespace detail {

inline double bm25_term_weight(double idf_value, double tf, double doc_len, double avgdl, const Bm25Params& p) {
    const double norm = avgdl > 0.0 ? doc_len / avgdl : 0.0;
    return idf_value * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

// Distinct query terms with their multiplicity.
inline std::map<std::string_view, std::uint32_t> query_term_counts(const NormalizedDocument& query) {
    std::map<std::string_view, std::uint32_t> counts;
    for (const auto& t : query.terms) ++counts[t];
    return counts;
}

}  // namespace detail

inline double bm25_score(const NormalizedDocument& query, const DocId& doc, const InvertedIndex& index,
                         const Bm25Params& params = {}) {
    const auto ord = index.ordinal(doc);
    if (!ord) throw UnknownDocumentError("document '" + doc.label + "' is not in the index");
    const double dl = index.doc_lengths()[*ord];
    double score = 0.0;
    for (const auto& [term, qtf] : detail::query_term_counts(query)) {
        const auto tf = index.tf(term, *ord);
        if (tf == 0) continue;
        score += qtf * detail::bm25_term_weight(idf(term, index), tf, dl, index.avgdl(), params);
    }
    return score;
}

/// Term-at-a-time accumulation of scores for every indexed document.
inline std::vector<double> score_all(const NormalizedDocument& query, const InvertedIndex& index,
                                     const Bm25Params& params = {}) {
    std::vector<double> acc(index.n_docs(), 0.0);
    const auto& lengths = index.doc_lengths();
    for (const auto& [term, qtf] : detail::query_term_counts(query)) {
        const auto list = index.postings(term);
        if (list.empty()) continue;
        const double w = idf(index.n_docs(), list.size());
        for (const auto& p : list) {
            acc[p.doc] += qtf * detail::bm25_term_weight(w, p.tf, lengths[p.doc], index.avgdl(), params);
        }
    }
    return acc;
}

/// Orders by score descending, then document id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc < b.doc;
}

/// Documents with a positive score, best first, at most `cutoff` of them.
/// With `fill_zero`, a short list is padded with zero-score documents in id
/// order up to the cutoff.
inline std::vector<ScoredDoc> rank(const NormalizedDocument& query, const InvertedIndex& index,
                                   const Bm25Params& params, std::size_t cutoff, bool fill_zero = true) {
    if (cutoff == 0) throw std::invalid_argument("cutoff must be at least 1");
    params.validate();
    const auto scores = score_all(query, index, params);
    std::vector<std::uint32_t> hits;
    for (std::uint32_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) hits.push_back(i);
    }
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;  // ordinals follow id order
    };
    if (hits.size() > cutoff) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(cutoff), hits.end(), better);
        hits.resize(cutoff);
    } else {
        std::sort(hits.begin(), hits.end(), better);
    }

    std::vector<ScoredDoc> out;
    out.reserve(std::min(cutoff, index.n_docs()));
    for (auto i : hits) out.push_back(ScoredDoc{index.docs()[i], scores[i]});
    if (fill_zero) {
        for (std::uint32_t i = 0; i < scores.size() && out.size() < cutoff; ++i) {
            if (scores[i] <= 0.0) out.push_back(ScoredDoc{index.docs()[i], 0.0});
        }
    }
    return out;
}

inline constexpr std::string_view kIndexMagic = "JRBM";
inline constexpr std::uint8_t kIndexVersion = 1;

inline std::string serialize_index(const InvertedIndex& index) {
    ByteWriter w(kIndexMagic, kIndexVersion);
    w.put_u64(index.n_docs());
    for (std::size_t i = 0; i < index.n_docs(); ++i) {
        w.put_u8(static_cast<std::uint8_t>(index.docs()[i].kind));
        w.put_string(index.docs()[i].label);
        w.put_u32(index.doc_lengths()[i]);
    }
    w.put_u64(index.postings().size());
    for (const auto& [term, list] : index.postings()) {
        w.put_string(term);
        w.put_u64(list.size());
        for (const auto& p : list) {
            w.put_u32(p.doc);
            w.put_u32(p.tf);
        }
    }
    return std::move(w).finish();
}

inline InvertedIndex deserialize_index(std::string_view bytes, std::string source = "index") {
    ByteReader r(bytes, kIndexMagic, kIndexVersion, std::move(source));
    const auto n = r.get_count(13);
    std::vector<DocId> docs;
    std::vector<std::uint32_t> lengths;
    docs.reserve(n);
    lengths.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        auto kind = doc_kind_from_byte(r.get_u8());
        if (!kind) r.fail("unknown document kind");
        docs.push_back(DocId{*kind, r.get_string()});
        lengths.push_back(r.get_u32());
    }
    InvertedIndex::PostingMap postings;
    const auto terms = r.get_count(16);
    for (std::uint64_t t = 0; t < terms; ++t) {
        std::string term = r.get_string();
        const auto len = r.get_count(8);
        std::vector<Posting> list;
        list.reserve(len);
        for (std::uint64_t k = 0; k < len; ++k) {
            const auto doc = r.get_u32();
            const auto tf = r.get_u32();
            list.push_back(Posting{doc, tf});
        }
        if (!postings.emplace(std::move(term), std::move(list)).second) r.fail("duplicate term");
    }
    r.expect_end();
    return InvertedIndex(std::move(docs), std::move(lengths), std::move(postings));
}

inline void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
    write_binary_file(path, serialize_index(index));
}

inline InvertedIndex load_index(const std::filesystem::path& path) {
    const std::string bytes = read_binary_file(path);
    return deserialize_index(bytes, path.string());
}

}  // namespace jurisrank
