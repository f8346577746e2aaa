#pragma once

#include <stdexcept>
#include <string>

namespace iongate {

/// Malformed or inconsistent configuration input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Trap parameters or crystal solution outside the stable region.
struct InstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative solver failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two ions coincide (or nearly so); carries the offending pair.
struct SingularityError : std::runtime_error {
    SingularityError(const std::string& msg, int ion_a, int ion_b)
        : std::runtime_error(msg), first(ion_a), second(ion_b) {}
    int first;
    int second;
};

/// A series evaluation exceeded its term budget; carries the bound
/// accumulated so far.
struct BudgetError : std::runtime_error {
    BudgetError(const std::string& msg, double bound)
        : std::runtime_error(msg), partial_bound(bound) {}
    double partial_bound;
};

/// File read/write failure or format mismatch.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace iongate
