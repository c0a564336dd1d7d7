#pragma once

// Little-endian, length-prefixed binary framing used by the index and model
// files:
//
//   magic[4] | version u8 | body ... | fnv1a64(all preceding bytes) u64
//
// Doubles are stored as their raw IEEE-754 bit pattern so that a load/save
// cycle reproduces the input byte for byte.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "jurisrank/errors.hpp"

namespace jurisrank {

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class ByteWriter {
public:
    ByteWriter(std::string_view magic, std::uint8_t version) {
        buf_.append(magic.substr(0, 4));
        put_u8(version);
    }

    void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

    void put_string(std::string_view s) {
        put_u64(s.size());
        buf_.append(s);
    }

    /// Appends the checksum and hands over the finished bytes.
    std::string finish() && {
        put_u64(fnv1a64(buf_));
        return std::move(buf_);
    }

private:
    std::string buf_;
};

class ByteReader {
public:
    /// Validates magic, version and checksum of `bytes`; reading then starts
    /// right after the version byte.
    ByteReader(std::string_view bytes, std::string_view magic, std::uint8_t version, std::string source)
        : source_(std::move(source)) {
        constexpr std::size_t kHeader = 5;
        constexpr std::size_t kTrailer = 8;
        if (bytes.size() < kHeader || bytes.substr(0, 4) != magic.substr(0, 4)) {
            if (bytes.size() < 4 && magic.substr(0, bytes.size()) == bytes) {
                throw ChecksumError(source_ + ": truncated file");
            }
            throw FormatError(source_ + ": not a " + std::string(magic) + " file (bad magic)");
        }
        const auto file_version = static_cast<std::uint8_t>(bytes[4]);
        if (file_version != version) {
            throw VersionError(source_ + ": unsupported format version " + std::to_string(file_version) +
                               " (expected " + std::to_string(version) + ")");
        }
        if (bytes.size() < kHeader + kTrailer) throw ChecksumError(source_ + ": truncated file");
        const std::string_view payload = bytes.substr(0, bytes.size() - kTrailer);
        std::uint64_t stored = 0;
        for (int i = 0; i < 8; ++i) {
            stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[payload.size() + i])) << (8 * i);
        }
        if (stored != fnv1a64(payload)) throw ChecksumError(source_ + ": checksum mismatch (corrupt or truncated)");
        data_ = payload;
        pos_ = kHeader;
    }

    std::uint8_t get_u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint32_t get_u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double get_f64() { return std::bit_cast<double>(get_u64()); }

    std::string get_string() {
        const std::uint64_t n = get_u64();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    /// Element count that must fit in the remaining bytes at `min_bytes_each`.
    std::uint64_t get_count(std::size_t min_bytes_each) {
        const std::uint64_t n = get_u64();
        if (min_bytes_each > 0 && n > remaining() / min_bytes_each) fail("element count exceeds file size");
        return n;
    }

    [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void expect_end() const {
        if (remaining() != 0) fail("trailing bytes after payload");
    }

    [[noreturn]] void fail(const std::string& what) const { throw FormatError(source_ + ": " + what); }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
    std::string source_;

    void need(std::uint64_t n) const {
        if (n > remaining()) fail("unexpected end of payload");
    }
};

}  // namespace jurisrank
