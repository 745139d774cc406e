#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace efcp {

enum class ErrorCode {
    InvalidArgument,
    EmptySupport,
    SupportMismatch,
    MetricPatternMismatch,
    DegenerateDistances,
    EmptyWarpSet,
    Parse,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::MetricPatternMismatch: return "MetricPatternMismatch";
    case ErrorCode::DegenerateDistances: return "DegenerateDistances";
    case ErrorCode::EmptyWarpSet: return "EmptyWarpSet";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

} // namespace efcp
