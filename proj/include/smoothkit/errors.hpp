#pragma once

#include <stdexcept>
#include <string>

namespace smoothkit {

// Bad input: malformed config, shape mismatch, missing file, grid mismatch.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical method failure: Riccati blow-up, singular covariance, lost
// definiteness.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace smoothkit
