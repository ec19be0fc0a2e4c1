#pragma once

// Mass-action reaction networks: species, reactions, states, and the
// rate/propensity math shared by the deterministic and stochastic engines.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chemsical {

/// Raised when a caller breaks a documented precondition (unbound species,
/// insufficient reactant, wrong state shape).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Symbolic species name: letters, digits and underscores, starting with a
/// letter. Construction validates.
class SpeciesId {
public:
    SpeciesId() = default;
    explicit SpeciesId(std::string name);

    const std::string& name() const noexcept { return name_; }
    static bool is_valid_name(std::string_view name) noexcept;

    friend auto operator<=>(const SpeciesId&, const SpeciesId&) = default;

private:
    std::string name_;
};

struct Reaction {
    std::vector<SpeciesId> reactants;
    std::vector<SpeciesId> products;
    double rate_constant = 0.0;

    friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// Species counts for the stochastic engine or concentrations for the
/// deterministic one. Keys are species names.
template <typename Amount>
class BasicChemState {
public:
    using amount_type = Amount;

    BasicChemState() = default;

    Amount amount(const SpeciesId& s) const;
    Amount amount(std::string_view name) const { return amount(SpeciesId(std::string(name))); }
    bool contains(const SpeciesId& s) const { return amounts_.count(s) != 0; }
    void set(const SpeciesId& s, Amount value);

    const std::map<SpeciesId, Amount>& amounts() const noexcept { return amounts_; }
    std::size_t size() const noexcept { return amounts_.size(); }

    friend bool operator==(const BasicChemState&, const BasicChemState&) = default;

private:
    std::map<SpeciesId, Amount> amounts_;
};

using DiscreteState = BasicChemState<std::uint64_t>;
using ContinuousState = BasicChemState<double>;

/// Ordered species and reactions. Species order is the dense index order
/// the engines compile to.
class ReactionNetwork {
public:
    ReactionNetwork() = default;
    ReactionNetwork(std::vector<SpeciesId> species, std::vector<Reaction> reactions,
                    std::map<std::size_t, std::string> labels = {});

    const std::vector<SpeciesId>& species() const noexcept { return species_; }
    const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
    const std::map<std::size_t, std::string>& labels() const noexcept { return labels_; }

    std::optional<std::size_t> index_of(const SpeciesId& s) const;
    std::size_t require_index(const SpeciesId& s) const;

    friend bool operator==(const ReactionNetwork&, const ReactionNetwork&) = default;

private:
    std::vector<SpeciesId> species_;
    std::vector<Reaction> reactions_;
    std::map<std::size_t, std::string> labels_;
};

struct Violation {
    std::optional<std::size_t> reaction;  // empty for network-level issues
    std::string message;
};

/// Empty result iff the network is well formed.
std::vector<Violation> validate_network(const ReactionNetwork& net);

/// k times the product of reactant amounts (a repeated species contributes
/// its amount squared).
double deterministic_rate(const Reaction& rx, const ContinuousState& s);

/// Gillespie propensity: counts distinct reactant combinations.
double stochastic_propensity(const Reaction& rx, const DiscreteState& s);

DiscreteState apply_reaction(const DiscreteState& s, const Reaction& rx);

/// Integer weight vectors w (one entry per network species) such that
/// w . (products - reactants) == 0 for every reaction. The returned set
/// spans the left null space of the stoichiometric matrix.
std::vector<std::vector<std::int64_t>> conservation_laws(const ReactionNetwork& net);

/// Species x reactions net-change matrix, row-major.
std::vector<std::vector<std::int64_t>> stoichiometric_matrix(const ReactionNetwork& net);

/// Dense-index form of a network used by the simulation engines.
struct CompiledNetwork {
    struct Term {
        std::uint32_t species;
        std::uint32_t multiplicity;
    };
    struct CompiledReaction {
        std::vector<Term> reactants;  // grouped by species
        std::vector<std::pair<std::uint32_t, std::int64_t>> delta;  // nonzero net changes
        double rate_constant;
    };

    std::vector<SpeciesId> species;
    std::vector<CompiledReaction> reactions;
    /// reactions whose propensity depends on each species
    std::vector<std::vector<std::uint32_t>> dependents;

    static CompiledNetwork compile(const ReactionNetwork& net);

    double rate(std::size_t j, std::span<const double> x) const;
    double propensity(std::size_t j, std::span<const std::uint64_t> x) const;

    template <typename Amount>
    std::vector<Amount> dense(const BasicChemState<Amount>& s) const;
    template <typename Amount>
    BasicChemState<Amount> state(std::span<const Amount> x) const;
};

}  // namespace chemsical
