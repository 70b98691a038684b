#pragma once

#include <stdexcept>
#include <string>

namespace ifs {

enum class ErrorKind {
    OutOfRange,
    TooLarge,
    TooFine,
    SpaceMismatch,
    InvalidParameter,
    Unsupported,
    Parse,
    Validation,
    Io,
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::TooFine: return "TooFine";
    case ErrorKind::SpaceMismatch: return "SpaceMismatch";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Library-wide exception. NotFound-class outcomes are not errors; they are
/// returned as empty optionals.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ifs
