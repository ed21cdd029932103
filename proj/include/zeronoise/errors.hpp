#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace zn {

// Error taxonomy. Every failure mode of the library maps onto one of these so
// callers (and the CLI) can report precise categories.

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point lies outside the declared domain, or an operation was asked to act
// outside its geometric preconditions.
struct domain_error : error {
    using error::error;
};

// Bad user-supplied configuration (file syntax, unknown keys, out-of-range values).
struct config_error : error {
    using error::error;
};

// A catalog map could not be built from the given parameters.
struct construction_error : error {
    using error::error;
};

// Grid/operator discretization failed (empty cells, rejection loops, ...).
struct discretization_error : error {
    using error::error;
};

// Noise kernel misuse (epsilon above the invariance margin, rejection overflow).
struct kernel_error : error {
    using error::error;
};

// An unknown catalog name or an operation unsupported for the given map.
struct unsupported_map_error : error {
    using error::error;
};

// Iterative solver ran out of its iteration budget. Carries the residual
// history so callers can inspect the convergence behaviour.
struct convergence_error : error {
    convergence_error(const std::string& what, std::vector<double> history)
        : error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

// A numeric computation degenerated (singular Jacobian, non-finite values).
struct numerical_error : error {
    using error::error;
};

}  // namespace zn
