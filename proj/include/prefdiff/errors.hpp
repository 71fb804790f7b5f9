#pragma once

#include <stdexcept>
#include <string>

namespace prefdiff {

// Bad configuration or precondition on user-supplied settings.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension mismatch between tensors/vectors.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values, degenerate norms, failed numeric procedures.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File I/O and (de)serialization failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace prefdiff
