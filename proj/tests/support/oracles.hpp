#pragma once

// Test-only reference implementations. These deliberately avoid the library
// code paths they check: no inverted index, no shared helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "jurisrank/document.hpp"
#include "jurisrank/random.hpp"

namespace jurisrank::testing {

/// BM25 by full scan of the raw documents.
inline double naive_bm25(const std::vector<NormalizedDocument>& docs, const std::vector<std::string>& query,
                         const std::string& doc_label, double k1, double b) {
    const double n = static_cast<double>(docs.size());
    double total_len = 0.0;
    for (const auto& d : docs) total_len += static_cast<double>(d.terms.size());
    const double avgdl = total_len / n;

    const NormalizedDocument* target = nullptr;
    for (const auto& d : docs) {
        if (d.id.label == doc_label) target = &d;
    }
    if (target == nullptr) return NAN;

    double score = 0.0;
    for (const auto& q : query) {  // each occurrence counts, giving qtf weighting
        double df = 0.0;
        for (const auto& d : docs) {
            if (std::find(d.terms.begin(), d.terms.end(), q) != d.terms.end()) df += 1.0;
        }
        const double tf = static_cast<double>(std::count(target->terms.begin(), target->terms.end(), q));
        if (df == 0.0 || tf == 0.0) continue;
        const double w = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double len = static_cast<double>(target->terms.size());
        score += w * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len / avgdl));
    }
    return score;
}

inline std::vector<NormalizedDocument> random_corpus(Rng& rng, std::size_t max_docs, std::size_t max_vocab,
                                                     std::size_t max_len) {
    const std::size_t n_docs = 1 + rng.below(max_docs);
    const std::size_t vocab = 1 + rng.below(max_vocab);
    std::vector<NormalizedDocument> docs;
    for (std::size_t i = 0; i < n_docs; ++i) {
        NormalizedDocument d;
        d.id = DocId{DocKind::kCase, "D" + std::to_string(i)};
        const std::size_t len = rng.below(max_len + 1);
        for (std::size_t k = 0; k < len; ++k) d.terms.push_back("t" + std::to_string(rng.below(vocab)));
        d.raw_token_count = d.terms.size();
        docs.push_back(std::move(d));
    }
    return docs;
}

/// 20 documents over a 30-word vocabulary. Each document draws mostly from
/// four words of its own, so paragraphs are distinguishable.
inline std::vector<NormalizedDocument> toy_corpus(std::uint64_t seed = 7) {
    Rng rng(seed);
    std::vector<NormalizedDocument> docs;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> weight(30, 1.0);
        for (int k = 0; k < 4; ++k) weight[rng.below(30)] += 12.0;
        double total = 0.0;
        for (double w : weight) total += w;
        NormalizedDocument d;
        char label[8];
        std::snprintf(label, sizeof label, "C%02d", i);
        d.id = DocId{DocKind::kCase, label};
        for (int t = 0; t < 60; ++t) {
            double u = rng.uniform() * total;
            std::size_t w = 0;
            while (w + 1 < weight.size() && u >= weight[w]) {
                u -= weight[w];
                ++w;
            }
            char word[8];
            std::snprintf(word, sizeof word, "w%02zu", w);
            d.terms.emplace_back(word);
        }
        d.raw_token_count = d.terms.size();
        docs.push_back(std::move(d));
    }
    return docs;
}

/// bpref by pairwise enumeration: for every retrieved relevant document,
/// look back over the prefix and count judged-nonrelevant documents.
/// `rel[i]` is 1 relevant, 0 judged nonrelevant, -1 unjudged.
inline double enumerate_bpref(const std::vector<int>& rel, std::size_t total_relevant, std::size_t total_nonrel) {
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        if (rel[i] != 1) continue;
        std::size_t above = 0;
        for (std::size_t j = 0; j < i; ++j) above += rel[j] == 0 ? 1 : 0;
        double penalty = 0.0;
        if (total_nonrel > 0) {
            penalty = static_cast<double>(std::min(above, total_relevant)) /
                      static_cast<double>(std::min(total_relevant, total_nonrel));
        }
        sum += 1.0 - penalty;
    }
    return sum / static_cast<double>(total_relevant);
}

}  // namespace jurisrank::testing
