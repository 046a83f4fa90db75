#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gsle {

enum class ErrorCode {
    InvalidGrid,
    InvalidParams,
    InvalidField,
    UnsupportedOrder,
    DegenerateState,
    OutOfDomain,
    NonmonotonePotential,
    EmptyBath,
    InvalidFriction,
    InvalidResolution,
    NumericalBlowup,
    InsufficientData,
    MemoryBudgetExceeded,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace gsle
