#pragma once

#include <stdexcept>
#include <string>

namespace ghost {

enum class ErrorKind {
    InvalidParameter,
    GridTooSmall,
    GridTooLarge,
    GeometryMismatch,
    SamplingViolation,
    PlaneMismatch,
    GridMismatch,
    InsufficientSamples,
    InsufficientData,
    DetectorKindMismatch,
    DegenerateInput,
    ShapeMismatch,
    NonFiniteInput,
    FingerprintMismatch,
    UnsupportedFormat,
    EmptyImage,
    ParseError,
    IoError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

} // namespace ghost
