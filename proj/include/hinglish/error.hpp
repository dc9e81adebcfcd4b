#pragma once

#include <stdexcept>
#include <string>

namespace hinglish {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input that could not be parsed at all.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A numeric value outside its permitted range.
class RangeError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

/// Raised by a remote endpoint client; carries the HTTP status (0 when the
/// request never produced a response).
class EndpointError : public Error {
public:
    EndpointError(int status, const std::string& what)
        : Error(what), status_(status) {}

    int status() const noexcept { return status_; }

    /// 429, 5xx and transport failures may succeed on a later try.
    bool retryable() const noexcept {
        return status_ == 0 || status_ == 429 || status_ >= 500;
    }

private:
    int status_;
};

}  // namespace hinglish
