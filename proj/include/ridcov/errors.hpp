#pragma once

#include <stdexcept>
#include <string>

namespace ridcov {

// Malformed input: bad files, bad config values, inconsistent data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative procedure stopped without reaching its tolerance or target.
// Carries the best value seen so callers can still report something useful.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_value, double error_bound)
        : std::runtime_error(what), best_value_(best_value), error_bound_(error_bound) {}

    double best_value() const { return best_value_; }
    double error_bound() const { return error_bound_; }

private:
    double best_value_;
    double error_bound_;
};

// A path planner failed to connect an origin-destination pair.
class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ridcov
