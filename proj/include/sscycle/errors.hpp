#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sscycle {

// Raised when an N_s algebra operation is applied outside its domain
// (e.g. taking a step out of a site that holds only a sleeper). Always a
// caller bug, never valid dynamics.
struct UndefinedOperationError : std::logic_error {
    using std::logic_error::logic_error;
};

// Toppling a site that is stable for the given model.
struct IllegalToppleError : std::logic_error {
    using std::logic_error::logic_error;
};

// A stabilization run exceeded its toppling cap. Carries the partial
// odometer so a slow-phase run can still be inspected.
struct CapExceededError : std::runtime_error {
    CapExceededError(std::string msg, std::vector<std::uint64_t> partial)
        : std::runtime_error(std::move(msg)), partial_odometer(std::move(partial)) {}
    std::vector<std::uint64_t> partial_odometer;
};

// State-space enumeration requested for an n too large to enumerate.
struct SizeGuardError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input: configuration text, experiment spec, CSV, CLI values.
struct InvalidSpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The SS shadow state diverged from the projected ARW state during a
// coupled run, or a run-level coupling identity failed. Must never fire.
struct CouplingViolationError : std::logic_error {
    using std::logic_error::logic_error;
};

// Not enough data points for a requested fit.
struct InsufficientDataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace sscycle
