#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ekmonoid {

enum class ErrorCode {
    InvalidArgument,
    DivergentInput,
    UnsupportedSubset,
    InvalidNormalizer,
    EmptySample,
    Unsupported,
    ParseError,
    InvalidCertificate,
    TheoremPairing,
    NumericFailure,
};

/// Stable machine-readable spelling, e.g. "THEOREM_PAIRING".
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace ekmonoid
