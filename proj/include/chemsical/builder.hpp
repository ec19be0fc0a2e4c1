#pragma once

// Two-stage successive-interference-cancellation receiver as a flat reaction
// network: Comparison, Translation, Approximate Majority and Threshold
// Adaptation blocks all run concurrently.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chemsical/crn.hpp"
#include "chemsical/crn_lang.hpp"

namespace chemsical {

/// Detection thresholds in molecules. The stage-1 indicator pool is
/// tau2_1 - tau2_0.
struct ThresholdSet {
    std::uint64_t tau1 = 231;
    std::uint64_t tau2_0 = 78;
    std::uint64_t tau2_1 = 386;

    void validate() const;
    std::uint64_t stage1_pool() const { return tau2_1 - tau2_0; }
    friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

/// One rate constant per block, normalized time units.
struct RrcSet {
    double kappa_D1 = 1.0;
    double kappa_T1 = 1.0;
    double kappa_AM1 = 0.1;
    double kappa_WA1 = 1.0;
    double kappa_D2 = 0.1;
    double kappa_T2 = 0.1;
    double kappa_AM2 = 0.001;

    void validate() const;
    /// Tabulated sets 1..5; set 5 is the baseline.
    static RrcSet preset(int index);
    std::array<double, 7> values() const;
    static RrcSet from_values(const std::array<double, 7>& v);
    friend bool operator==(const RrcSet&, const RrcSet&) = default;
};

inline constexpr std::array<const char*, 7> kRrcNames = {
    "kappa_D1", "kappa_T1", "kappa_AM1", "kappa_WA1", "kappa_D2", "kappa_T2", "kappa_AM2"};

enum class AdaptationStrategy {
    catalytic,  // base -> base + W2, D1^1 -> D1^1 + W2, W2 -> 0
    consuming,  // base -> W2, D1^1 -> W2 (destroys the stage-1 readout)
};

enum class TranslationStrategy {
    copy,      // x_on -> x_on + d1, x_off -> x_off + d0, d1 -> 0, d0 -> 0
    transfer,  // x_on -> d1, x_off -> d0 (drains the indicator pool)
};

struct ChemSICalParams {
    ThresholdSet thresholds;
    RrcSet rrc;
    std::uint64_t stage2_pool = 167;
    std::uint64_t input_count = 0;
    std::uint64_t n_max = 600;  // evaluation domain [0, n_max)
    AdaptationStrategy adaptation = AdaptationStrategy::catalytic;
    TranslationStrategy translation = TranslationStrategy::copy;

    void validate() const;
};

struct DecisionPair {
    int s1 = 0;
    int s2 = 0;
    friend bool operator==(const DecisionPair&, const DecisionPair&) = default;
    std::string label() const { return std::to_string(s1) + std::to_string(s2); }
};

/// Species names used by the generated network.
namespace species {
inline const SpeciesId Y_on{"Y_on"};
inline const SpeciesId W_1{"W_1"};
inline const SpeciesId W_2{"W_2"};
inline const SpeciesId W_2B{"W_2B"};
inline const SpeciesId X_on1{"X_on1"};
inline const SpeciesId X_off1{"X_off1"};
inline const SpeciesId X_on2{"X_on2"};
inline const SpeciesId X_off2{"X_off2"};
inline const SpeciesId D1_1{"D1_1"};
inline const SpeciesId D1_0{"D1_0"};
inline const SpeciesId D2_1{"D2_1"};
inline const SpeciesId D2_0{"D2_0"};
inline const SpeciesId B_1{"B_1"};
inline const SpeciesId B_2{"B_2"};
}  // namespace species

// Block constructors. Each returns the reactions of one block at rate k.

/// input + x_off -> input + x_on; threshold + x_on -> threshold + x_off
std::vector<Reaction> build_comparison_block(const SpeciesId& input, const SpeciesId& threshold,
                                             const SpeciesId& x_on, const SpeciesId& x_off, double k);
/// d1 and d0 follow x_on and x_off (copy) or absorb them (transfer).
std::vector<Reaction> build_translation_block(
    const SpeciesId& x_on, const SpeciesId& x_off, const SpeciesId& d1, const SpeciesId& d0, double k,
    TranslationStrategy strategy = TranslationStrategy::copy);
/// d1 + d0 -> 2 blank; blank + d1 -> 2 d1; blank + d0 -> 2 d0
std::vector<Reaction> build_approximate_majority_block(const SpeciesId& d1, const SpeciesId& d0,
                                                       const SpeciesId& blank, double k);
/// Catalytic addition with decay; fixed point target = base + detect.
std::vector<Reaction> build_threshold_adaptation_block(
    const SpeciesId& base, const SpeciesId& detect, const SpeciesId& target, double k,
    AdaptationStrategy strategy = AdaptationStrategy::catalytic);

/// The full receiver network with its initial state and `meta` provenance.
NetworkDocument build_chemsical(const ChemSICalParams& p);

/// s_i = 1 iff D_i^1 >= D_i^0.
template <typename Amount>
DecisionPair read_decision(const BasicChemState<Amount>& final);
DecisionPair read_decision(const std::vector<SpeciesId>& species, std::span<const double> row);

}  // namespace chemsical
