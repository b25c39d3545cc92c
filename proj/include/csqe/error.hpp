#pragma once

#include <stdexcept>
#include <string>

namespace csqe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (corpus, queries, qrels, run files, index files).
/// `line()` is 1-based, or 0 when the error is not tied to a line.
class DataError : public Error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration or violated precondition on caller-supplied values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure talking to a generation backend. `status()` is the HTTP status,
/// or 0 for transport failures.
class BackendError : public Error {
public:
    BackendError(const std::string& what, int status, bool retriable)
        : Error(what), status_(status), retriable_(retriable) {}

    int status() const noexcept { return status_; }
    bool retriable() const noexcept { return retriable_; }

private:
    int status_;
    bool retriable_;
};

}  // namespace csqe
