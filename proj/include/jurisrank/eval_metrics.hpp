#pragma once

// Run files, qrels, and the four per-query measures reported for every run:
// precision at 10, average precision, bpref and reciprocal rank.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jurisrank/bm25.hpp"
#include "jurisrank/errors.hpp"
#include "jurisrank/io.hpp"

namespace jurisrank {

/// Judgments of one query: doc label -> relevance (<= 0 judged nonrelevant).
using QueryJudgments = std::map<std::string, int, std::less<>>;

inline bool is_relevant(const QueryJudgments& j, std::string_view doc) {
    auto it = j.find(doc);
    return it != j.end() && it->second >= 1;
}

inline bool is_judged_nonrelevant(const QueryJudgments& j, std::string_view doc) {
    auto it = j.find(doc);
    return it != j.end() && it->second < 1;
}

inline std::size_t relevant_count(const QueryJudgments& j) {
    return static_cast<std::size_t>(std::count_if(j.begin(), j.end(), [](const auto& kv) { return kv.second >= 1; }));
}

inline std::size_t nonrelevant_count(const QueryJudgments& j) { return j.size() - relevant_count(j); }

class Qrels {
public:
    void add(std::string query, std::string doc, int relevance) {
        auto& q = judgments_[std::move(query)];
        if (!q.emplace(std::move(doc), relevance).second) throw FormatError("duplicate qrels judgment");
    }

    [[nodiscard]] const std::map<std::string, QueryJudgments, std::less<>>& queries() const noexcept {
        return judgments_;
    }

    [[nodiscard]] const QueryJudgments* find(std::string_view query) const {
        auto it = judgments_.find(query);
        return it == judgments_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t relevant(std::string_view query) const {
        const auto* j = find(query);
        return j ? relevant_count(*j) : 0;
    }

    [[nodiscard]] std::size_t judged_nonrelevant(std::string_view query) const {
        const auto* j = find(query);
        return j ? nonrelevant_count(*j) : 0;
    }

    friend bool operator==(const Qrels&, const Qrels&) = default;

private:
    std::map<std::string, QueryJudgments, std::less<>> judgments_;
};

struct RunEntry {
    std::string doc;
    double score = 0.0;
    std::size_t rank = 0;

    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

/// Per-query ranked lists sharing one run tag. Ranks run 1..n in list order.
struct RankedRun {
    std::string tag;
    std::map<std::string, std::vector<RunEntry>, std::less<>> queries;

    /// Appends a scored ranking for `query`, numbering ranks from 1.
    void add(const std::string& query, std::span<const ScoredDoc> ranking) {
        auto& list = queries[query];
        list.clear();
        list.reserve(ranking.size());
        for (std::size_t i = 0; i < ranking.size(); ++i) list.push_back(RunEntry{ranking[i].doc.label, ranking[i].score, i + 1});
    }

    friend bool operator==(const RankedRun&, const RankedRun&) = default;
};

inline std::vector<std::string> ranked_labels(std::span<const RunEntry> entries) {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.doc);
    return out;
}

/// Relevant documents among the first k, over k. Short rankings count as
/// padded with nonrelevant documents.
inline double precision_at_k(std::span<const std::string> ranking, const QueryJudgments& judgments, std::size_t k) {
    if (k == 0) throw std::invalid_argument("precision cutoff must be at least 1");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
        if (is_relevant(judgments, ranking[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

/// Mean over relevant documents of precision at each relevant document's
/// rank; unretrieved relevant documents contribute 0. Zero when R = 0.
inline double average_precision(std::span<const std::string> ranking, const QueryJudgments& judgments) {
    const std::size_t r = relevant_count(judgments);
    if (r == 0) return 0.0;
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (is_relevant(judgments, ranking[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(r);
}

/// Binary preference:
///   (1/R) * sum over retrieved relevant r of 1 - min(n_r, R) / min(R, N)
/// with n_r the judged-nonrelevant documents ranked above r and N the
/// judged-nonrelevant total. Unjudged documents are ignored; with N = 0 each
/// retrieved relevant document counts 1.
inline double bpref(std::span<const std::string> ranking, const QueryJudgments& judgments) {
    const std::size_t r = relevant_count(judgments);
    if (r == 0) return 0.0;
    const std::size_t n = nonrelevant_count(judgments);
    std::size_t nonrel_above = 0;
    double sum = 0.0;
    for (const auto& doc : ranking) {
        if (is_relevant(judgments, doc)) {
            if (n == 0) {
                sum += 1.0;
            } else {
                sum += 1.0 - static_cast<double>(std::min(nonrel_above, r)) / static_cast<double>(std::min(r, n));
            }
        } else if (is_judged_nonrelevant(judgments, doc)) {
            ++nonrel_above;
        }
    }
    return sum / static_cast<double>(r);
}

inline double reciprocal_rank(std::span<const std::string> ranking, const QueryJudgments& judgments) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (is_relevant(judgments, ranking[i])) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

struct QueryMetrics {
    std::string query;
    double precision_at_10 = 0.0;
    double average_precision = 0.0;
    double bpref = 0.0;
    double reciprocal_rank = 0.0;
};

struct MetricsReport {
    std::string tag;
    std::vector<QueryMetrics> per_query;  // evaluated queries, by label
    QueryMetrics mean;                    // query label "all"
    std::vector<std::string> skipped;     // qrels queries with no relevant document
};

/// Scores every qrels query with at least one relevant document; queries
/// the run lacks score 0. A non-empty run sharing no query with the qrels
/// is rejected.
inline MetricsReport evaluate_run(const RankedRun& run, const Qrels& qrels) {
    if (!run.queries.empty()) {
        const bool overlap = std::any_of(run.queries.begin(), run.queries.end(),
                                         [&](const auto& kv) { return qrels.find(kv.first) != nullptr; });
        if (!overlap) throw Error("run and qrels share no query");
    }
    MetricsReport report;
    report.tag = run.tag;
    report.mean.query = "all";
    for (const auto& [query, judgments] : qrels.queries()) {
        if (relevant_count(judgments) == 0) {
            report.skipped.push_back(query);
            continue;
        }
        std::vector<std::string> ranking;
        if (auto it = run.queries.find(query); it != run.queries.end()) ranking = ranked_labels(it->second);
        QueryMetrics m;
        m.query = query;
        m.precision_at_10 = precision_at_k(ranking, judgments, 10);
        m.average_precision = average_precision(ranking, judgments);
        m.bpref = jurisrank::bpref(ranking, judgments);
        m.reciprocal_rank = reciprocal_rank(ranking, judgments);
        report.per_query.push_back(std::move(m));
    }
    if (!report.per_query.empty()) {
        const double n = static_cast<double>(report.per_query.size());
        for (const auto& m : report.per_query) {
            report.mean.precision_at_10 += m.precision_at_10;
            report.mean.average_precision += m.average_precision;
            report.mean.bpref += m.bpref;
            report.mean.reciprocal_rank += m.reciprocal_rank;
        }
        report.mean.precision_at_10 /= n;
        report.mean.average_precision /= n;
        report.mean.bpref /= n;
        report.mean.reciprocal_rank /= n;
    }
    return report;
}

namespace detail {

inline bool parse_size(std::string_view s, std::size_t& out) {
    if (s.empty() || s.size() > 18) return false;
    std::size_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    out = v;
    return true;
}

inline bool parse_int(std::string_view s, int& out) {
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    std::size_t v = 0;
    if (!parse_size(s, v) || v > 1000000) return false;
    out = neg ? -static_cast<int>(v) : static_cast<int>(v);
    return true;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    const std::string buf(s);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && errno != ERANGE && std::isfinite(out);
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace detail

/// Whitespace-separated `query iteration doc relevance` lines.
inline Qrels parse_qrels_text(std::string_view text, const std::string& source = "qrels") {
    Qrels qrels;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_whitespace(line);
        if (f.size() != 4) throw FormatError(source, line_no, "expected 4 fields 'query iter doc relevance'");
        int rel = 0;
        if (!detail::parse_int(f[3], rel)) throw FormatError(source, line_no, "relevance is not an integer");
        const auto* existing = qrels.find(f[0]);
        if (existing && existing->contains(f[2])) {
            throw FormatError(source, line_no, "duplicate judgment for (" + std::string(f[0]) + ", " + std::string(f[2]) + ")");
        }
        qrels.add(std::string(f[0]), std::string(f[2]), rel);
    }
    return qrels;
}

inline Qrels parse_qrels(const std::filesystem::path& path) {
    return parse_qrels_text(read_text_file(path), path.string());
}

/// `query Q0 doc rank score tag` lines, scores with six decimals.
inline std::string format_run(const RankedRun& run) {
    if (!is_valid_label(run.tag)) throw FormatError("run tag must be non-empty and contain no whitespace");
    std::string out;
    for (const auto& [query, entries] : run.queries) {
        for (const auto& e : entries) {
            out += query;
            out += " Q0 ";
            out += e.doc;
            out += ' ';
            out += std::to_string(e.rank);
            out += ' ';
            out += detail::format_fixed(e.score, 6);
            out += ' ';
            out += run.tag;
            out += '\n';
        }
    }
    return out;
}

inline void write_run(const RankedRun& run, const std::filesystem::path& path) {
    write_binary_file(path, format_run(run));
}

inline RankedRun parse_run_text(std::string_view text, const std::string& source = "run") {
    RankedRun run;
    std::set<std::pair<std::string, std::string>, std::less<>> seen;
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_whitespace(line);
        if (f.size() != 6) throw FormatError(source, line_no, "expected 6 fields 'query Q0 doc rank score tag'");
        std::size_t rank = 0;
        if (!detail::parse_size(f[3], rank) || rank == 0) throw FormatError(source, line_no, "rank must be a positive integer");
        double score = 0.0;
        if (!detail::parse_double(f[4], score)) throw FormatError(source, line_no, "score is not a finite number");
        if (!seen.emplace(std::string(f[0]), std::string(f[2])).second) {
            throw FormatError(source, line_no, "duplicate (query, doc) pair");
        }
        if (run.tag.empty()) run.tag = std::string(f[5]);
        run.queries[std::string(f[0])].push_back(RunEntry{std::string(f[2]), score, rank});
    }
    for (auto& [query, entries] : run.queries) {
        std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i].rank == entries[i - 1].rank) {
                throw FormatError(source, 0, "duplicate rank " + std::to_string(entries[i].rank) + " for query " + query);
            }
        }
    }
    return run;
}

inline RankedRun parse_run(const std::filesystem::path& path) {
    return parse_run_text(read_text_file(path), path.string());
}

/// `metric<TAB>query<TAB>value` lines, query "all" for the means.
inline std::string format_report_machine(const MetricsReport& report) {
    std::string out;
    auto emit = [&out](const QueryMetrics& m) {
        const std::pair<const char*, double> rows[] = {{"P_10", m.precision_at_10},
                                                      {"map", m.average_precision},
                                                      {"bpref", m.bpref},
                                                      {"recip_rank", m.reciprocal_rank}};
        for (const auto& [name, value] : rows) {
            out += name;
            out += '\t';
            out += m.query;
            out += '\t';
            out += detail::format_fixed(value, 4);
            out += '\n';
        }
    };
    for (const auto& m : report.per_query) emit(m);
    emit(report.mean);
    return out;
}

inline std::string format_report_table(const MetricsReport& report) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %8s %8s %8s %8s\n", "query", "P@10", "MAP", "BPREF", "MRR");
    os << "run: " << (report.tag.empty() ? "(untagged)" : report.tag) << '\n' << line;
    auto row = [&](const QueryMetrics& m) {
        std::snprintf(line, sizeof line, "%-20s %8.4f %8.4f %8.4f %8.4f\n", m.query.c_str(), m.precision_at_10,
                      m.average_precision, m.bpref, m.reciprocal_rank);
        os << line;
    };
    for (const auto& m : report.per_query) row(m);
    row(report.mean);
    os << "evaluated queries: " << report.per_query.size() << '\n';
    if (!report.skipped.empty()) {
        os << "skipped (no relevant documents):";
        for (const auto& q : report.skipped) os << ' ' << q;
        os << '\n';
    }
    return os.str();
}

}  // namespace jurisrank
