#include "chemsical/trajectory.hpp"

#include <algorithm>

#include "chemsical/crn_lang.hpp"

namespace chemsical {

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::t_end: return "t_end";
        case StopReason::steady_state: return "steady_state";
        case StopReason::absorbing: return "absorbing";
        case StopReason::max_events: return "max_events";
    }
    return "unknown";
}

template <typename Amount>
BasicChemState<Amount> BasicTrajectory<Amount>::state_at(std::size_t i) const {
    BasicChemState<Amount> s;
    for (std::size_t k = 0; k < species.size(); ++k) s.set(species[k], states.at(i)[k]);
    return s;
}

template <typename Amount>
Amount BasicTrajectory<Amount>::final_amount(const SpeciesId& s) const {
    auto it = std::find(species.begin(), species.end(), s);
    if (it == species.end()) throw ContractViolation("species '" + s.name() + "' not in trajectory");
    return states.back()[static_cast<std::size_t>(it - species.begin())];
}

template <typename Amount>
void write_trajectory_csv(std::ostream& os, const BasicTrajectory<Amount>& traj) {
    os << 't';
    for (const auto& s : traj.species) os << ',' << s.name();
    os << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << format_real(traj.times[i]);
        for (auto v : traj.states[i]) {
            if constexpr (std::is_floating_point_v<Amount>)
                os << ',' << format_real(v);
            else
                os << ',' << v;
        }
        os << '\n';
    }
}

template struct BasicTrajectory<double>;
template struct BasicTrajectory<std::uint64_t>;
template void write_trajectory_csv(std::ostream&, const Trajectory&);
template void write_trajectory_csv(std::ostream&, const DiscreteTrajectory&);

}  // namespace chemsical
