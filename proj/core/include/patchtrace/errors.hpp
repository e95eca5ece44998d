#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patchtrace {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed commit-log stream. Carries the byte offset of the offending
/// record and its zero-based index in the stream.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset, std::size_t record_index)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ", record " +
                std::to_string(record_index) + ")"),
          byte_offset_(byte_offset),
          record_index_(record_index) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }
    std::size_t record_index() const noexcept { return record_index_; }

private:
    std::size_t byte_offset_;
    std::size_t record_index_;
};

/// Ill-formed persisted artifact (dataset, ranked-list CSV, head file, config).
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Embedding provider failure: transport error, non-2xx response, or a
/// dimension mismatch between provider and caller.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Provider failure while scoring a candidate list; carries the index of
/// the candidate that failed (everything before it completed).
class CandidateProviderError : public ProviderError {
public:
    CandidateProviderError(const std::string& what, std::size_t candidate_index)
        : ProviderError("candidate " + std::to_string(candidate_index) + ": " + what),
          candidate_index_(candidate_index) {}

    std::size_t candidate_index() const noexcept { return candidate_index_; }

private:
    std::size_t candidate_index_;
};

/// A batch operation failed partway through; `completed` items finished
/// before the underlying failure.
class PartialResultError : public Error {
public:
    PartialResultError(const std::string& what, std::size_t completed)
        : Error(what + " (completed " + std::to_string(completed) + " candidates)"),
          completed_(completed) {}

    std::size_t completed() const noexcept { return completed_; }

private:
    std::size_t completed_;
};

}  // namespace patchtrace
