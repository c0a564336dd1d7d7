#pragma once

// Text normalization: tokenize -> strip numbers -> remove stopwords -> stem
// -> lemmatize. Every stage is a pure function; `normalize` composes them.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurisrank/document.hpp"
#include "jurisrank/english_stopwords.hpp"
#include "jurisrank/errors.hpp"
#include "jurisrank/io.hpp"
#include "jurisrank/porter_stemmer.hpp"

namespace jurisrank {

namespace detail {

// Decodes one code point starting at `i`; malformed bytes decode to U+FFFD
// and advance by one.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        len = 2;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        len = 4;
        cp = c & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += len;
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Word characters: ASCII alphanumerics plus non-ASCII code points outside the
// punctuation, symbol, space, control and private-use blocks.
inline bool is_word_codepoint(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows, box drawing
    if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xD800 && cp <= 0xF8FF) return false;  // surrogates, private use
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    if (cp == 0xFEFF || (cp >= 0xFFF0 && cp <= 0xFFFF)) return false;
    if (cp == 0x1680 || cp == 0x180E) return false;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
    if (cp >= 0xF0000) return false;
    return true;
}

inline char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp < 0xC0) return cp;
    if (cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    return cp;
}

}  // namespace detail

using Token = std::string;

/// Lowercased maximal runs of word characters, in text order.
inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    Token current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = detail::decode_utf8(text, i);
        if (detail::is_word_codepoint(cp)) {
            detail::append_utf8(current, detail::to_lower(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline bool is_numeric_token(std::string_view token) {
    if (token.empty()) return false;
    for (char c : token) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

/// Drops tokens made only of ASCII digits.
inline std::vector<Token> strip_numbers(std::span<const Token> tokens) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!is_numeric_token(t)) out.push_back(t);
    }
    return out;
}

class StopwordList {
public:
    StopwordList() = default;

    template <typename Range>
    explicit StopwordList(const Range& words) {
        for (const auto& w : words) entries_.emplace(w);
    }

    StopwordList(std::initializer_list<std::string_view> words) {
        for (auto w : words) entries_.emplace(w);
    }

    static StopwordList english() { return StopwordList(kEnglishStopwords); }

    /// One token per line; blank lines and lines starting with '#' are skipped.
    static StopwordList load(const std::filesystem::path& path) {
        const std::string content = read_text_file(path);
        StopwordList list;
        for (auto line : split_lines(content)) {
            line = trim(line);
            if (line.empty() || line.front() == '#') continue;
            list.entries_.emplace(line);
        }
        return list;
    }

    [[nodiscard]] bool contains(std::string_view token) const { return entries_.find(token) != entries_.end(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::set<std::string, std::less<>>& entries() const noexcept { return entries_; }

private:
    std::set<std::string, std::less<>> entries_;
};

inline std::vector<Token> remove_stopwords(std::span<const Token> tokens, const StopwordList& stoplist) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!stoplist.contains(t)) out.push_back(t);
    }
    return out;
}

/// Surface -> lemma lookup; a miss leaves the token unchanged.
class LemmaDictionary {
public:
    LemmaDictionary() = default;
    LemmaDictionary(std::initializer_list<std::pair<const std::string, std::string>> entries)
        : entries_(entries.begin(), entries.end()) {}

    /// Two whitespace-separated tokens per line (surface, lemma). Blank lines
    /// and '#' comments are skipped.
    static LemmaDictionary load(const std::filesystem::path& path) {
        const std::string content = read_text_file(path);
        LemmaDictionary dict;
        std::size_t line_no = 0;
        for (auto line : split_lines(content)) {
            ++line_no;
            auto trimmed = trim(line);
            if (trimmed.empty() || trimmed.front() == '#') continue;
            auto fields = split_whitespace(trimmed);
            if (fields.size() != 2) {
                throw FormatError(path.string(), line_no, "expected 'surface lemma'");
            }
            dict.entries_.insert_or_assign(std::string(fields[0]), std::string(fields[1]));
        }
        return dict;
    }

    void add(std::string surface, std::string lemma) { entries_.insert_or_assign(std::move(surface), std::move(lemma)); }

    [[nodiscard]] const std::string* find(std::string_view token) const {
        auto it = entries_.find(token);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, std::string, std::less<>> entries_;
};

inline Token lemmatize(std::string_view token, const LemmaDictionary& dict) {
    if (const auto* lemma = dict.find(token)) return *lemma;
    return Token(token);
}

/// Default-constructed config enables every stage with the built-in English
/// stopword list and no lemma dictionary.
struct NormalizerConfig {
    bool strip_numbers = true;
    bool remove_stopwords = true;
    StopwordList stopwords = StopwordList::english();
    bool stem = true;
    std::optional<LemmaDictionary> lemma_dictionary;

    /// Every stage off: `normalize` degenerates to `tokenize`.
    static NormalizerConfig identity() {
        NormalizerConfig c;
        c.strip_numbers = false;
        c.remove_stopwords = false;
        c.stem = false;
        c.lemma_dictionary.reset();
        return c;
    }
};

inline NormalizedDocument normalize(std::string_view text, DocId id, const NormalizerConfig& config) {
    NormalizedDocument doc;
    doc.id = std::move(id);
    std::vector<Token> tokens = tokenize(text);
    doc.raw_token_count = tokens.size();
    if (config.strip_numbers) tokens = strip_numbers(tokens);
    if (config.remove_stopwords) tokens = remove_stopwords(tokens, config.stopwords);
    if (config.stem) {
        for (auto& t : tokens) t = porter_stem(t);
    }
    if (config.lemma_dictionary) {
        for (auto& t : tokens) t = lemmatize(t, *config.lemma_dictionary);
    }
    doc.terms = std::move(tokens);
    return doc;
}

}  // namespace jurisrank
