#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace binsonar {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated input. `offset()` is the byte position where
/// decoding stopped, or npos when not applicable.
class FormatError : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit FormatError(const std::string& what, std::size_t offset = npos)
        : Error(offset == npos ? what : what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Input lacks the MZ / PE signatures.
class NotAPeError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace binsonar
