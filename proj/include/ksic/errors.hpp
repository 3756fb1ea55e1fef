#pragma once

#include <stdexcept>
#include <string>

namespace ksic {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NoRootFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Derivative estimates disagree between a grid and its coarsening.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite or runaway state after a time step.
struct StepRejected : std::runtime_error {
    double t;
    StepRejected(const std::string& what, double t_) : std::runtime_error(what), t(t_) {}
};

struct ConditionsViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DesignInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ksic
