#pragma once

// Deterministic mass-action integration with an embedded Dormand-Prince 5(4)
// pair.

#include <stdexcept>

#include "chemsical/crn.hpp"
#include "chemsical/trajectory.hpp"

namespace chemsical {

struct OdeOptions {
    double t_end = 100.0;
    std::size_t sample_count = 101;  // output grid points including t = 0 and t_end
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double steady_state_epsilon = 1e-9;  // 0 disables the early stop
    double fixed_step = 0.0;             // > 0 disables adaptivity (used for order checks)
    double initial_step = 0.0;           // 0 picks a step from the initial derivative

    void validate() const;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(double t_reached, const std::string& what);
    double time_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

/// Integrates dx/dt = N . rate(x) from `init`. The last sample is the state at
/// min(t_end, steady-state time).
Trajectory simulate_ode(const ReactionNetwork& net, const ContinuousState& init,
                        const OdeOptions& opts = {});
Trajectory simulate_ode(const CompiledNetwork& net, std::vector<double> x0, const OdeOptions& opts);

struct SteadyStateResult {
    ContinuousState state;
    double time = 0.0;
    bool converged = false;
};

/// Final state of simulate_ode with the steady-state early stop; reports
/// non-convergence instead of throwing when t_end is reached first.
SteadyStateResult steady_state(const ReactionNetwork& net, const ContinuousState& init,
                               const OdeOptions& opts = {});

/// Right-hand side dx/dt for a compiled network.
void mass_action_derivative(const CompiledNetwork& net, std::span<const double> x,
                            std::span<double> dxdt);

ContinuousState to_continuous(const DiscreteState& s);

}  // namespace chemsical
