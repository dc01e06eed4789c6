#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace egohand {

enum class ErrorCode {
    NonPositiveDepth,
    FrameMismatch,
    JointCountMismatch,
    LengthMismatch,
    InvalidParams,
    NoConvergence,
    OutOfModelRange,
    DimensionMismatch,
    InfeasibleRig,
    ParseError,
    InvariantViolation,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
        case ErrorCode::FrameMismatch: return "FrameMismatch";
        case ErrorCode::JointCountMismatch: return "JointCountMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::OutOfModelRange: return "OutOfModelRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InfeasibleRig: return "InfeasibleRig";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Base exception for every failure raised by the library. The code selects
/// the CLI exit category.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed input at a 1-based line of a line-delimited stream.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Raised by the Newton inverse of the fisheye model; carries the last residual.
class NoConvergence : public Error {
public:
    NoConvergence(double residual, int iterations)
        : Error(ErrorCode::NoConvergence,
                "no convergence after " + std::to_string(iterations) +
                    " iterations, residual " + std::to_string(residual)),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace egohand
