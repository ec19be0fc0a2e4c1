#include "chemsical/builder.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace chemsical {

void ThresholdSet::validate() const {
    if (!(tau2_0 <= tau1 && tau1 <= tau2_1))
        throw std::invalid_argument("thresholds must satisfy tau2_0 <= tau1 <= tau2_1");
}

void RrcSet::validate() const {
    const auto v = values();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] > 0) || !std::isfinite(v[i]))
            throw std::invalid_argument(std::string(kRrcNames[i]) + " must be positive");
}

std::array<double, 7> RrcSet::values() const {
    return {kappa_D1, kappa_T1, kappa_AM1, kappa_WA1, kappa_D2, kappa_T2, kappa_AM2};
}

RrcSet RrcSet::from_values(const std::array<double, 7>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

RrcSet RrcSet::preset(int index) {
    switch (index) {
        case 1: return from_values({1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
        case 2: return from_values({1.0, 1.0, 1.0, 1.0, 0.1, 0.1, 0.1});
        case 3: return from_values({1.0, 1.0, 0.1, 1.0, 0.1, 0.1, 0.01});
        case 4: return from_values({1.0, 1.0, 0.1, 1.0, 0.1, 0.01, 0.001});
        case 5: return from_values({1.0, 1.0, 0.1, 1.0, 0.1, 0.1, 0.001});
        default: throw std::invalid_argument("RRC preset must be 1..5");
    }
}

void ChemSICalParams::validate() const {
    thresholds.validate();
    rrc.validate();
    if (stage2_pool == 0) throw std::invalid_argument("stage2_pool must be positive");
    if (input_count >= n_max)
        throw std::invalid_argument("input_count must lie in [0, n_max)");
}

namespace {

void require_distinct(std::initializer_list<const SpeciesId*> ids) {
    std::set<SpeciesId> seen;
    for (const auto* s : ids)
        if (!seen.insert(*s).second)
            throw std::invalid_argument("block species must be distinct ('" + s->name() + "')");
}

}  // namespace

std::vector<Reaction> build_comparison_block(const SpeciesId& input, const SpeciesId& threshold,
                                             const SpeciesId& x_on, const SpeciesId& x_off, double k) {
    require_distinct({&input, &threshold, &x_on, &x_off});
    return {
        {{input, x_off}, {input, x_on}, k},
        {{threshold, x_on}, {threshold, x_off}, k},
    };
}

std::vector<Reaction> build_translation_block(const SpeciesId& x_on, const SpeciesId& x_off,
                                              const SpeciesId& d1, const SpeciesId& d0, double k,
                                              TranslationStrategy strategy) {
    require_distinct({&x_on, &x_off, &d1, &d0});
    if (strategy == TranslationStrategy::copy) {
        return {
            {{x_on}, {x_on, d1}, k},
            {{x_off}, {x_off, d0}, k},
            {{d1}, {}, k},
            {{d0}, {}, k},
        };
    }
    return {
        {{x_on}, {d1}, k},
        {{x_off}, {d0}, k},
    };
}

std::vector<Reaction> build_approximate_majority_block(const SpeciesId& d1, const SpeciesId& d0,
                                                       const SpeciesId& blank, double k) {
    require_distinct({&d1, &d0, &blank});
    return {
        {{d1, d0}, {blank, blank}, k},
        {{blank, d1}, {d1, d1}, k},
        {{blank, d0}, {d0, d0}, k},
    };
}

std::vector<Reaction> build_threshold_adaptation_block(const SpeciesId& base, const SpeciesId& detect,
                                                       const SpeciesId& target, double k,
                                                       AdaptationStrategy strategy) {
    require_distinct({&base, &detect, &target});
    if (strategy == AdaptationStrategy::consuming) {
        return {
            {{base}, {target}, k},
            {{detect}, {target}, k},
        };
    }
    return {
        {{base}, {base, target}, k},
        {{detect}, {detect, target}, k},
        {{target}, {}, k},
    };
}

NetworkDocument build_chemsical(const ChemSICalParams& p) {
    p.validate();
    using namespace species;
    const auto& th = p.thresholds;
    const auto& k = p.rrc;

    std::vector<Reaction> reactions;
    std::map<std::size_t, std::string> labels;
    auto add = [&](std::vector<Reaction> block, const std::string& label) {
        for (auto& rx : block) {
            labels[reactions.size()] = label;
            reactions.push_back(std::move(rx));
        }
    };
    add(build_comparison_block(Y_on, W_1, X_on1, X_off1, k.kappa_D1), "D,1");
    add(build_translation_block(X_on1, X_off1, D1_1, D1_0, k.kappa_T1, p.translation), "T,1");
    add(build_approximate_majority_block(D1_1, D1_0, B_1, k.kappa_AM1), "AM,1");
    add(build_threshold_adaptation_block(W_2B, D1_1, W_2, k.kappa_WA1, p.adaptation), "WA,1");
    add(build_comparison_block(Y_on, W_2, X_on2, X_off2, k.kappa_D2), "D,2");
    add(build_translation_block(X_on2, X_off2, D2_1, D2_0, k.kappa_T2, p.translation), "T,2");
    add(build_approximate_majority_block(D2_1, D2_0, B_2, k.kappa_AM2), "AM,2");

    std::vector<SpeciesId> all = {Y_on, W_1, W_2, W_2B, X_on1, X_off1, X_on2,
                                  X_off2, D1_1, D1_0, D2_1, D2_0, B_1, B_2};

    const std::uint64_t pool1 = th.stage1_pool();
    const std::uint64_t pool2 = p.stage2_pool;

    NetworkDocument doc;
    doc.network = ReactionNetwork(all, std::move(reactions), std::move(labels));
    for (const auto& s : all) doc.initial.set(s, 0);
    doc.initial.set(Y_on, p.input_count);
    doc.initial.set(W_1, th.tau1);
    doc.initial.set(W_2B, th.tau2_0);
    // catalytic adaptation starts W_2 at its no-detection fixed point
    doc.initial.set(W_2, p.adaptation == AdaptationStrategy::catalytic ? th.tau2_0 : 0);
    doc.initial.set(X_on1, pool1 / 2);
    doc.initial.set(X_off1, pool1 - pool1 / 2);
    doc.initial.set(X_on2, pool2 / 2);
    doc.initial.set(X_off2, pool2 - pool2 / 2);

    doc.metadata["model"] = "chemsical";
    doc.metadata["tau1"] = std::to_string(th.tau1);
    doc.metadata["tau2_0"] = std::to_string(th.tau2_0);
    doc.metadata["tau2_1"] = std::to_string(th.tau2_1);
    doc.metadata["stage2_pool"] = std::to_string(pool2);
    doc.metadata["input_count"] = std::to_string(p.input_count);
    doc.metadata["n_max"] = std::to_string(p.n_max);
    doc.metadata["adaptation"] =
        p.adaptation == AdaptationStrategy::catalytic ? "catalytic" : "consuming";
    doc.metadata["translation"] = p.translation == TranslationStrategy::copy ? "copy" : "transfer";
    const auto v = k.values();
    for (std::size_t i = 0; i < v.size(); ++i) doc.metadata[kRrcNames[i]] = format_real(v[i]);
    return doc;
}

template <typename Amount>
DecisionPair read_decision(const BasicChemState<Amount>& s) {
    using namespace species;
    return {s.amount(D1_1) >= s.amount(D1_0) ? 1 : 0, s.amount(D2_1) >= s.amount(D2_0) ? 1 : 0};
}

template DecisionPair read_decision(const DiscreteState&);
template DecisionPair read_decision(const ContinuousState&);

DecisionPair read_decision(const std::vector<SpeciesId>& sp, std::span<const double> row) {
    auto at = [&](const SpeciesId& id) {
        auto it = std::find(sp.begin(), sp.end(), id);
        if (it == sp.end()) throw ContractViolation("species '" + id.name() + "' missing");
        return row[static_cast<std::size_t>(it - sp.begin())];
    };
    using namespace species;
    return {at(D1_1) >= at(D1_0) ? 1 : 0, at(D2_1) >= at(D2_0) ? 1 : 0};
}

}  // namespace chemsical
