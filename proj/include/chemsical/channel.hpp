#pragma once

// Diffusion channel between two on-off-keyed point transmitters and a passive
// spherical receiver. SI units throughout.

#include <cstdint>
#include <vector>

#include "chemsical/random.hpp"

namespace chemsical {

struct ChannelParams {
    double d1 = 10e-6;        // m, nearer transmitter
    double d2 = 12e-6;        // m
    double radius = 1e-6;     // m
    double diffusion = 1e-9;  // m^2/s
    double n_tx = 1e6;        // molecules per pulse

    void validate() const;
    double receiver_volume() const;
};

struct ScenarioSignal {
    double t_p = 0;      // s
    double lambda1 = 0;  // expected count from TX1 at t_p
    double lambda2 = 0;
};

struct PmfVector {
    std::vector<double> p;  // p[n] for n in [0, n_max)
    double tail = 0;        // 1 - sum(p)

    std::size_t n_max() const { return p.size(); }
};

/// Mean received molecule count t seconds after a pulse from distance d.
double expected_signal(double d, double t, const ChannelParams& cp);

/// argmax_t expected_signal(d, t) = d^2 / (6 D).
double peak_time(double d, double diffusion);

/// Expected counts from both transmitters sampled at TX1's peak time
/// (or at `t_sample` when positive).
ScenarioSignal scenario_signal(const ChannelParams& cp, double t_sample = 0);

double poisson_pmf(std::uint64_t n, double lambda);
double poisson_log_pmf(std::uint64_t n, double lambda);

/// Equiprobable mixture of the four symbol hypotheses.
PmfVector input_pmf(const ScenarioSignal& sig, std::size_t n_max);

/// Poisson draw with mean s1 * lambda1 + s2 * lambda2.
std::uint64_t sample_input(const ScenarioSignal& sig, int s1, int s2, RandomSeed seed);

}  // namespace chemsical
