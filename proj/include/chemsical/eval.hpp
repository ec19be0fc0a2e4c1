#pragma once

// Detection metrics and experiments: SIC oracle, P_d curves, input-weighted
// error probability, ODE error profiles, sensitivity sweeps, CSV output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chemsical/builder.hpp"
#include "chemsical/channel.hpp"
#include "chemsical/ode.hpp"
#include "chemsical/ssa.hpp"

namespace chemsical {

/// s1 = [n >= tau1]; s2 = [n >= tau2^{s1}].
DecisionPair sic_oracle(std::uint64_t n, const ThresholdSet& th);

struct SicOracle {
    ThresholdSet thresholds;
    DecisionPair operator()(std::uint64_t n) const { return sic_oracle(n, thresholds); }
};

/// 1 iff both bits match.
int correct_detection(const DecisionPair& chem, const DecisionPair& oracle);

/// inputs 0, stride, 2*stride, ... below n_max
std::vector<std::uint64_t> input_grid(std::uint64_t n_max, std::uint64_t stride);

struct OdeProfile {
    std::vector<std::uint64_t> inputs;
    std::vector<int> correct;            // c[n]
    std::vector<char> failed;            // integration failure, excluded
    std::vector<double> contribution;    // pmf[n] * (1 - c[n])
    double weighted_error = 0;
    std::vector<std::string> warnings;
};

/// Builds the network at every input, integrates towards steady state (capped
/// at opts.t_end) and compares the read decision with the oracle.
OdeProfile ode_error_profile(const ChemSICalParams& base, const std::vector<std::uint64_t>& inputs,
                             const PmfVector& pmf, const OdeOptions& opts, unsigned workers = 1);

struct DetectionCurve {
    std::vector<std::uint64_t> inputs;
    std::vector<double> p_d;
    std::vector<double> stderr_;       // Wilson score, z = 1
    std::vector<std::size_t> truncated;  // counted as errors
    std::size_t n_traj = 0;

    friend bool operator==(const DetectionCurve&, const DetectionCurve&) = default;
};

/// Trajectory i at input n uses RandomSeed{derive_seed(base_seed, n), i}, so
/// the curve is independent of the worker count and of the grid.
DetectionCurve detection_probability_curve(const ChemSICalParams& base,
                                           const std::vector<std::uint64_t>& inputs,
                                           std::size_t n_traj, std::uint64_t base_seed,
                                           const SsaOptions& opts, unsigned workers = 1);

double wilson_stderr(std::size_t successes, std::size_t trials);

struct ErrorReport {
    double p_e = 0;
    std::vector<double> contributions;  // per n in [0, pmf size)
    double tail = 0;                    // pmf mass beyond n_max, not included
    double p_e_ideal = 0;

    friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

/// p_e = sum_n pmf[n] (1 - P_d[n]). P_d between grid points is linearly
/// interpolated and held constant beyond the ends of the grid.
ErrorReport weighted_error_probability(const DetectionCurve& curve, const PmfVector& pmf);

/// Bit error probability of the non-chemical SIC detector, averaged over the
/// two bits and the four equiprobable hypotheses.
double ideal_error_probability(const ScenarioSignal& sig, const ThresholdSet& th);

enum class SweepAxis { threshold_pairs, kappa_am2, parameter };

struct SweepSpec {
    SweepAxis axis = SweepAxis::threshold_pairs;
    std::string parameter;       // for SweepAxis::parameter
    std::vector<double> values;  // empty: the axis default grid
};

struct SweepPoint {
    std::string label;
    ChemSICalParams params;
    std::optional<ErrorReport> report;
    DetectionCurve curve;
    std::string error;  // set when the point failed
};

/// (tau2_0, tau2_1) pairs widening symmetrically from the baseline.
std::vector<std::pair<std::uint64_t, std::uint64_t>> default_threshold_pairs();
std::vector<double> default_kappa_am2_grid();

/// Applies a named parameter (kappa_*, tau1, tau2_0, tau2_1, stage2_pool).
void set_parameter(ChemSICalParams& p, const std::string& name, double value);

struct EvalSettings {
    ScenarioSignal signal;
    std::uint64_t n_max = 600;
    std::uint64_t stride = 2;
    std::size_t n_traj = 200;
    std::uint64_t base_seed = 1;
    SsaOptions ssa;
    unsigned workers = 1;
};

std::vector<SweepPoint> sensitivity_sweep(const SweepSpec& spec, const ChemSICalParams& base,
                                          const EvalSettings& settings);

/// Provenance header: "# params: ..." plus an optional timestamp line.
struct CsvHeader {
    std::string params;
    bool timestamp = true;
};

void write_pmf_csv(std::ostream& os, const PmfVector& pmf, const CsvHeader& header);
void write_pd_csv(std::ostream& os, const DetectionCurve& curve, const CsvHeader& header);
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points, const CsvHeader& header);
void write_profile_csv(std::ostream& os, const OdeProfile& profile, const CsvHeader& header);

}  // namespace chemsical
