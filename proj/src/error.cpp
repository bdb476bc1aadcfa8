#include "ghost/error.hpp"

namespace ghost {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::GeometryMismatch: return "GeometryMismatch";
    case ErrorKind::SamplingViolation: return "SamplingViolation";
    case ErrorKind::PlaneMismatch: return "PlaneMismatch";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DetectorKindMismatch: return "DetectorKindMismatch";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace ghost
