// errors.hpp: Error kinds shared by every exactq module

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exactq {

enum class ErrorKind {
    // model
    NonPositiveFrequency,
    InvalidParameter,
    InvalidRange,
    NonPositiveCount,
    NotSorted,
    NegativeWidth,
    DimensionMismatch,
    DegenerateFrequencies,
    // subspace
    SigmaOutOfRange,
    CodeOutOfRange,
    OracleTooLarge,
    NotNormalized,
    TooLarge,
    // eigen
    PoleHit,
    NotHermitian,
    NoConvergence,
    DegenerateSpectrum,
    // dynamics
    NotAState,
    Overflow,
    // cli
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonPositiveFrequency: return "NonPositiveFrequency";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::InvalidRange: return "InvalidRange";
        case ErrorKind::NonPositiveCount: return "NonPositiveCount";
        case ErrorKind::NotSorted: return "NotSorted";
        case ErrorKind::NegativeWidth: return "NegativeWidth";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DegenerateFrequencies: return "DegenerateFrequencies";
        case ErrorKind::SigmaOutOfRange: return "SigmaOutOfRange";
        case ErrorKind::CodeOutOfRange: return "CodeOutOfRange";
        case ErrorKind::OracleTooLarge: return "OracleTooLarge";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::PoleHit: return "PoleHit";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorKind::NotAState: return "NotAState";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Process exit code for an error escaping the CLI: 2 config, 3 numeric, 4 IO.
inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NoConvergence:
        case ErrorKind::DegenerateSpectrum:
        case ErrorKind::DegenerateFrequencies:
        case ErrorKind::PoleHit:
        case ErrorKind::NotHermitian:
        case ErrorKind::NotAState:
        case ErrorKind::Overflow:
            return 3;
        case ErrorKind::IoError:
            return 4;
        default:
            return 2;
    }
}

namespace detail {
inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}
}  // namespace detail

}  // namespace exactq
