#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "chemsical/crn.hpp"

namespace chemsical {

enum class StopReason { t_end, steady_state, absorbing, max_events };

/// Time-stamped dense states. Rows follow `species` order.
template <typename Amount>
struct BasicTrajectory {
    std::vector<SpeciesId> species;
    std::vector<double> times;
    std::vector<std::vector<Amount>> states;
    StopReason reason = StopReason::t_end;
    std::uint64_t events = 0;  // accepted steps (ODE) or fired reactions (SSA)

    bool truncated() const noexcept { return reason == StopReason::max_events; }
    std::size_t size() const noexcept { return times.size(); }

    const std::vector<Amount>& final_row() const { return states.back(); }
    BasicChemState<Amount> state_at(std::size_t i) const;
    BasicChemState<Amount> final_state() const { return state_at(states.size() - 1); }
    Amount final_amount(const SpeciesId& s) const;
};

using Trajectory = BasicTrajectory<double>;
using DiscreteTrajectory = BasicTrajectory<std::uint64_t>;

/// `t,<species...>` header then one row per sample, full precision.
template <typename Amount>
void write_trajectory_csv(std::ostream& os, const BasicTrajectory<Amount>& traj);

std::string to_string(StopReason reason);

}  // namespace chemsical
