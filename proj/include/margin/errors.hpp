#pragma once

#include <stdexcept>

namespace margin {

// Bad inputs: dimension mismatch, invalid covariance, out-of-domain argument.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Economically infeasible: no-loan corner, empty gain region, nonviable market.
struct infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite result or a failed internal consistency check.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario file problem, reported with line/field diagnostics.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace margin
