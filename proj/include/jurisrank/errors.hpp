#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jurisrank {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A malformed record in a text file. `line()` is 1-based, 0 when unknown.
class FormatError : public Error {
public:
    FormatError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}

    explicit FormatError(const std::string& what) : Error(what), line_(0) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ChecksumError : public Error {
public:
    using Error::Error;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class EmptyCorpusError : public Error {
public:
    EmptyCorpusError() : Error("empty corpus") {}
    using Error::Error;
};

class EmptyVocabularyError : public Error {
public:
    using Error::Error;
};

/// A document shares no terms with a model vocabulary.
class EmptyOverlapError : public Error {
public:
    using Error::Error;
};

class UnknownDocumentError : public Error {
public:
    using Error::Error;
};

}  // namespace jurisrank
