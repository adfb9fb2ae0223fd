#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace galerkin {

/// Precondition violation on an argument (bad index, empty support, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested lattice sum does not converge (s <= 1).
class DivergentSeries : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A time integration produced non-finite or runaway coefficients.
class BlowUp : public std::runtime_error {
public:
    /// trajectory < 0 when the step was not part of a labelled trajectory.
    BlowUp(const std::string& what, long long trajectory, long long step, std::string mode)
        : std::runtime_error(what), trajectory_(trajectory), step_(step), mode_(std::move(mode)) {}

    long long trajectory() const noexcept { return trajectory_; }
    long long step() const noexcept { return step_; }
    const std::string& mode() const noexcept { return mode_; }

private:
    long long trajectory_;
    long long step_;
    std::string mode_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace detail
}  // namespace galerkin
