#pragma once

#include <stdexcept>
#include <string>

namespace fdreg {

// Raised when external data cannot be ingested (missing file, ragged rows,
// non-numeric cells). Carries a human-readable location in the message.
struct LoadError : std::runtime_error {
    explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a computation produces or receives non-finite values (for
// example a diverging training run). Distinct from contract violations, which
// are std::invalid_argument.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fdreg
