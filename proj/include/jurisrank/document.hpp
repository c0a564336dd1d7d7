#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jurisrank {

enum class DocKind : std::uint8_t { kCase = 0, kStatute = 1, kQuery = 2 };

inline std::string_view to_string(DocKind kind) {
    switch (kind) {
        case DocKind::kCase: return "case";
        case DocKind::kStatute: return "statute";
        case DocKind::kQuery: return "query";
    }
    return "unknown";
}

inline std::optional<DocKind> doc_kind_from_byte(std::uint8_t b) {
    if (b > static_cast<std::uint8_t>(DocKind::kQuery)) return std::nullopt;
    return static_cast<DocKind>(b);
}

/// Identity of a case, statute or query, e.g. (case, "C5") or (query, "AILA_Q2").
struct DocId {
    DocKind kind = DocKind::kCase;
    std::string label;

    // Ordering is by label first so that ranking tie-breaks read naturally.
    friend std::strong_ordering operator<=>(const DocId& a, const DocId& b) {
        if (auto c = a.label <=> b.label; c != 0) return c;
        return a.kind <=> b.kind;
    }
    friend bool operator==(const DocId&, const DocId&) = default;
};

/// True when `label` is non-empty and free of whitespace and control bytes.
inline bool is_valid_label(std::string_view label) {
    if (label.empty()) return false;
    for (unsigned char c : label) {
        if (c <= 0x20 || c == 0x7f) return false;
    }
    return true;
}

/// A document reduced to its ordered normalized terms.
struct NormalizedDocument {
    DocId id;
    std::vector<std::string> terms;
    std::size_t raw_token_count = 0;  // tokens before any filtering

    friend bool operator==(const NormalizedDocument&, const NormalizedDocument&) = default;
};

}  // namespace jurisrank
