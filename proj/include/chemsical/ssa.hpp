#pragma once

// Exact stochastic simulation (Gillespie direct method) and seeded ensembles.

#include <functional>
#include <map>
#include <string>

#include "chemsical/crn.hpp"
#include "chemsical/random.hpp"
#include "chemsical/trajectory.hpp"

namespace chemsical {

enum class RecordMode { final_state, sampled_grid, event_log };

struct SsaOptions {
    double t_end = 100.0;
    RecordMode record = RecordMode::final_state;
    std::size_t sample_count = 101;  // sampled_grid only
    std::uint64_t max_events = 100'000'000;
    // Lump closed two-state pools (see SsaPlan). Exact in distribution; off
    // gives the plain direct method with every conversion event enumerated.
    bool aggregate_pools = true;

    void validate() const;
};

/// Precomputed event-loop structure. A pool is a species pair {on, off}
/// whose members only convert into each other (rate linear in the converting
/// member, catalysts outside any pool) and are otherwise read catalytically,
/// first order, by "reader" reactions. Pools are advanced lazily with exact
/// binomial transitions; readers fire by thinning against the pool total.
struct SsaPlan {
    struct Pool {
        std::uint32_t on = 0;
        std::uint32_t off = 0;
        std::vector<std::uint32_t> to_on;   // off -> on conversions
        std::vector<std::uint32_t> to_off;  // on -> off conversions
        std::vector<std::uint32_t> readers;
        std::vector<std::uint32_t> catalysts;  // sorted species indices
    };
    struct ReactionRole {
        // shadow: the off-reading half of a complementary reader pair, fired
        // through its partner
        enum Kind { plain, conversion, reader, shadow } kind = plain;
        int pool = -1;
        std::uint32_t read_species = 0;
        int partner = -1;
    };

    std::vector<Pool> pools;
    std::vector<int> pool_of_species;
    std::vector<ReactionRole> role;
    std::vector<std::vector<std::uint32_t>> affected;       // per reaction
    std::vector<std::vector<std::uint32_t>> touched_pools;  // per reaction

    static SsaPlan build(const CompiledNetwork& net, bool aggregate);
};

/// Stops at t_end, when the total propensity hits zero, or after max_events
/// (flagged via StopReason::max_events). In final_state mode the trajectory
/// holds the initial row and the state at the stopping time.
DiscreteTrajectory simulate_ssa(const ReactionNetwork& net, const DiscreteState& init,
                                RandomSeed seed, const SsaOptions& opts = {});
DiscreteTrajectory simulate_ssa(const CompiledNetwork& net, std::vector<std::uint64_t> x0,
                                RandomSeed seed, const SsaOptions& opts);
DiscreteTrajectory simulate_ssa(const CompiledNetwork& net, const SsaPlan& plan,
                                std::vector<std::uint64_t> x0, RandomSeed seed, const SsaOptions& opts);

using Readout = std::function<std::string(const DiscreteState&)>;

struct EnsembleSummary {
    std::size_t n_traj = 0;
    std::size_t truncated = 0;
    std::vector<SpeciesId> species;
    std::vector<std::vector<std::uint64_t>> final_states;  // trajectory order
    std::vector<double> mean;
    std::vector<double> variance;  // unbiased; 0 when n_traj == 1
    std::vector<std::string> labels;  // per trajectory, empty without readout
    std::map<std::string, std::size_t> tallies;

    friend bool operator==(const EnsembleSummary&, const EnsembleSummary&) = default;
};

/// Trajectory i uses stream_index i. The result does not depend on `workers`.
EnsembleSummary run_ensemble(const ReactionNetwork& net, const DiscreteState& init,
                             std::size_t n_traj, std::uint64_t base_seed, const SsaOptions& opts,
                             const Readout& readout = {}, unsigned workers = 1);

/// JSON text with n_traj, truncated, counts, mean and variance.
std::string summary_to_json(const EnsembleSummary& summary);

}  // namespace chemsical
