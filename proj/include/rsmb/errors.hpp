#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsmb {

enum class ErrorKind {
    CflViolation,
    BadDimension,
    NonPositiveTime,
    QuadratureFailure,
    ObstacleInitialPositive,
    AlreadyBlownUp,
    DimensionMismatch,
    GridMismatch,
    ConfigError,
    InsufficientData,
    FormatError,
    NonMonotoneTime,
    KernelSingularity,
    NumericalInstability,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::CflViolation: return "CflViolation";
        case ErrorKind::BadDimension: return "BadDimension";
        case ErrorKind::NonPositiveTime: return "NonPositiveTime";
        case ErrorKind::QuadratureFailure: return "QuadratureFailure";
        case ErrorKind::ObstacleInitialPositive: return "ObstacleInitialPositive";
        case ErrorKind::AlreadyBlownUp: return "AlreadyBlownUp";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::FormatError: return "FormatError";
        case ErrorKind::NonMonotoneTime: return "NonMonotoneTime";
        case ErrorKind::KernelSingularity: return "KernelSingularity";
        case ErrorKind::NumericalInstability: return "NumericalInstability";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` distinguishes the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Validation failures (bad input/config) vs numerical failures; the CLI maps
    /// these to different exit codes.
    bool is_validation() const noexcept {
        switch (kind_) {
            case ErrorKind::QuadratureFailure:
            case ErrorKind::KernelSingularity:
            case ErrorKind::NumericalInstability:
            case ErrorKind::AlreadyBlownUp:
                return false;
            default:
                return true;
        }
    }

private:
    ErrorKind kind_;
};

}  // namespace rsmb
