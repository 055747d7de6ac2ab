#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvml {

enum class ErrorKind {
    InvalidInput,
    SingularSystem,
    GenerationFailure,
    NonFiniteObjective,
    AllViewsMissing,
    UndefinedMetric,
    MissingFile,
    SchemaViolation,
    NonFiniteEntry,
    LabelDomainViolation,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Numerical failures (divergence, singular systems, failed generation) as
/// opposed to validation failures of user-supplied input.
constexpr bool is_numerical(ErrorKind kind) noexcept
{
    return kind == ErrorKind::SingularSystem || kind == ErrorKind::GenerationFailure ||
           kind == ErrorKind::NonFiniteObjective;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::AllViewsMissing: return "AllViewsMissing";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::LabelDomainViolation: return "LabelDomainViolation";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace mvml
