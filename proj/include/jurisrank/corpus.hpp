#pragma once

// Loading of the three collections: prior cases, statutes and situation
// queries. Documents are normalized at load time and ordered by label.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "jurisrank/document.hpp"
#include "jurisrank/errors.hpp"
#include "jurisrank/io.hpp"
#include "jurisrank/text_pipeline.hpp"

namespace jurisrank {

struct CorpusStats {
    std::size_t document_count = 0;
    std::size_t total_terms = 0;
    std::size_t vocabulary_size = 0;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

inline CorpusStats corpus_stats(std::span<const NormalizedDocument> documents) {
    CorpusStats stats;
    std::unordered_set<std::string_view> vocab;
    stats.document_count = documents.size();
    for (const auto& d : documents) {
        stats.total_terms += d.terms.size();
        for (const auto& t : d.terms) vocab.insert(t);
    }
    stats.vocabulary_size = vocab.size();
    return stats;
}

/// Immutable collection of normalized documents with unique ids.
class Corpus {
public:
    Corpus() = default;

    explicit Corpus(std::vector<NormalizedDocument> documents) : documents_(std::move(documents)) {
        std::set<DocId> seen;
        for (const auto& d : documents_) {
            if (!seen.insert(d.id).second) {
                throw FormatError("duplicate document label '" + d.id.label + "'");
            }
        }
        stats_ = corpus_stats(documents_);
    }

    [[nodiscard]] const std::vector<NormalizedDocument>& documents() const noexcept { return documents_; }
    [[nodiscard]] const CorpusStats& stats() const noexcept { return stats_; }
    [[nodiscard]] std::size_t size() const noexcept { return documents_.size(); }
    [[nodiscard]] bool empty() const noexcept { return documents_.empty(); }

private:
    std::vector<NormalizedDocument> documents_;
    CorpusStats stats_;
};

inline CorpusStats corpus_stats(const Corpus& corpus) { return corpus.stats(); }

namespace detail {

inline std::string_view strip_bom(std::string_view s) {
    if (s.starts_with("\xEF\xBB\xBF")) s.remove_prefix(3);
    return s;
}

// `<label>.txt` regular files in a directory, sorted by label.
inline std::vector<std::filesystem::path> list_labelled_files(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.stem().string() < b.stem().string(); });
    return files;
}

inline std::string label_of(const std::filesystem::path& file) {
    std::string label = file.stem().string();
    if (!is_valid_label(label)) throw FormatError(file.string(), 0, "invalid document label '" + label + "'");
    return label;
}

}  // namespace detail

inline Corpus load_case_corpus(const std::filesystem::path& dir, const NormalizerConfig& config) {
    std::vector<NormalizedDocument> docs;
    for (const auto& file : detail::list_labelled_files(dir)) {
        const std::string body = read_text_file(file);
        if (trim(body).empty()) throw FormatError(file.string(), 0, "empty case document");
        docs.push_back(normalize(detail::strip_bom(body), DocId{DocKind::kCase, detail::label_of(file)}, config));
    }
    return Corpus(std::move(docs));
}

struct Statute {
    DocId id;
    std::string title;
    std::string description;

    /// Text that gets indexed: title and description joined by one space.
    [[nodiscard]] std::string indexed_text() const {
        if (description.empty()) return title;
        return title + " " + description;
    }
};

namespace detail {

// Per-statute file: "Title: ..." / "Desc: ..." headed lines when present,
// otherwise first non-empty line is the title and the rest the description.
inline Statute parse_statute_file(const std::filesystem::path& file) {
    const std::string content = read_text_file(file);
    Statute s{DocId{DocKind::kStatute, label_of(file)}, {}, {}};
    std::vector<std::string_view> rest;
    bool headed = false;
    for (auto line : split_lines(strip_bom(content))) {
        auto t = trim(line);
        if (t.starts_with("Title:")) {
            s.title = std::string(trim(t.substr(6)));
            headed = true;
        } else if (t.starts_with("Desc:")) {
            s.description = std::string(trim(t.substr(5)));
            headed = true;
        } else if (!t.empty()) {
            rest.push_back(t);
        }
    }
    if (!headed) {
        if (!rest.empty()) {
            s.title = std::string(rest.front());
            rest.erase(rest.begin());
        }
    }
    for (auto r : rest) {
        if (!s.description.empty()) s.description += ' ';
        s.description += r;
    }
    if (s.title.empty()) throw FormatError(file.string(), 0, "statute has no title");
    return s;
}

}  // namespace detail

/// Reads statutes from a `label||title||description` file or a directory
/// of per-statute `<label>.txt` files. Result is ordered by label.
inline std::vector<Statute> load_statute_records(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::vector<Statute> out;
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        for (const auto& file : detail::list_labelled_files(path)) out.push_back(detail::parse_statute_file(file));
    } else {
        if (!fs::exists(path, ec)) throw IoError("no such statute file or directory: " + path.string());
        const std::string content = read_text_file(path);
        std::size_t line_no = 0;
        for (auto line : split_lines(detail::strip_bom(content))) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto first = line.find("||");
            if (first == std::string_view::npos) throw FormatError(path.string(), line_no, "missing '||' separator");
            std::string_view label = trim(line.substr(0, first));
            std::string_view remainder = line.substr(first + 2);
            std::string_view title = remainder;
            std::string_view description;
            if (auto second = remainder.find("||"); second != std::string_view::npos) {
                title = remainder.substr(0, second);
                description = remainder.substr(second + 2);
            }
            if (!is_valid_label(label)) throw FormatError(path.string(), line_no, "invalid statute label");
            title = trim(title);
            if (title.empty()) throw FormatError(path.string(), line_no, "statute has no title");
            out.push_back(Statute{DocId{DocKind::kStatute, std::string(label)}, std::string(title),
                                  std::string(trim(description))});
        }
        std::stable_sort(out.begin(), out.end(), [](const Statute& a, const Statute& b) { return a.id < b.id; });
    }
    return out;
}

inline Corpus load_statutes(const std::filesystem::path& path, const NormalizerConfig& config) {
    std::vector<NormalizedDocument> docs;
    for (const auto& s : load_statute_records(path)) docs.push_back(normalize(s.indexed_text(), s.id, config));
    return Corpus(std::move(docs));
}

enum class Split { kTrain, kTest };

struct SituationQuery {
    DocId id;
    std::string body;
    Split split = Split::kTest;
    NormalizedDocument normalized;
};

/// One train-query label per line.
inline std::set<std::string, std::less<>> load_split(const std::filesystem::path& path) {
    std::set<std::string, std::less<>> train;
    const std::string content = read_text_file(path);
    for (auto line : split_lines(detail::strip_bom(content))) {
        auto t = trim(line);
        if (!t.empty() && t.front() != '#') train.emplace(t);
    }
    return train;
}

/// Parses `label||text` lines. Queries listed in `split_file` are train,
/// all others test.
inline std::vector<SituationQuery> load_queries(const std::filesystem::path& path, const NormalizerConfig& config,
                                                const std::optional<std::filesystem::path>& split_file = std::nullopt) {
    std::set<std::string, std::less<>> train;
    if (split_file) train = load_split(*split_file);

    const std::string content = read_text_file(path);
    std::vector<SituationQuery> queries;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (auto line : split_lines(detail::strip_bom(content))) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto sep = line.find("||");
        if (sep == std::string_view::npos) throw FormatError(path.string(), line_no, "missing '||' separator");
        std::string_view label = trim(line.substr(0, sep));
        if (!is_valid_label(label)) throw FormatError(path.string(), line_no, "invalid query label");
        if (!seen.emplace(label).second) {
            throw FormatError(path.string(), line_no, "duplicate query label '" + std::string(label) + "'");
        }
        SituationQuery q;
        q.id = DocId{DocKind::kQuery, std::string(label)};
        q.body = std::string(line.substr(sep + 2));
        q.split = train.contains(label) ? Split::kTrain : Split::kTest;
        q.normalized = normalize(q.body, q.id, config);
        queries.push_back(std::move(q));
    }
    return queries;
}

}  // namespace jurisrank
