#pragma once

#include <stdexcept>
#include <string>

namespace cludl {

// Invalid user-facing configuration (bad scenario parameters, unknown method
// names, malformed config files). The CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A caller broke an API precondition (dimension mismatch, index out of range).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Design-calibration failure (e.g. smoothing width cannot reach the target
// local correlation inside the search bracket).
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exactly collinear columns / singular normal equations.
struct DegenerateDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Statistical estimation cannot proceed (e.g. saturated fit in the
// residual noise estimator).
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The connectivity graph cannot be partitioned into the requested number
// of connected clusters.
struct InfeasiblePartitionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric is undefined on the given input (e.g. TPR with empty support).
struct UndefinedMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cludl
