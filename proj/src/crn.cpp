#include "chemsical/crn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace chemsical {

SpeciesId::SpeciesId(std::string name) : name_(std::move(name)) {
    if (!is_valid_name(name_))
        throw std::invalid_argument("invalid species name '" + name_ + "'");
}

bool SpeciesId::is_valid_name(std::string_view name) noexcept {
    if (name.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(name.front())) return false;
    return std::all_of(name.begin(), name.end(),
                       [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

template <typename Amount>
Amount BasicChemState<Amount>::amount(const SpeciesId& s) const {
    auto it = amounts_.find(s);
    if (it == amounts_.end()) throw ContractViolation("species '" + s.name() + "' not in state");
    return it->second;
}

template <typename Amount>
void BasicChemState<Amount>::set(const SpeciesId& s, Amount value) {
    if constexpr (std::is_floating_point_v<Amount>) {
        if (!(value >= 0) || !std::isfinite(value))
            throw ContractViolation("amount of '" + s.name() + "' must be finite and non-negative");
    }
    amounts_[s] = value;
}

template class BasicChemState<std::uint64_t>;
template class BasicChemState<double>;

ReactionNetwork::ReactionNetwork(std::vector<SpeciesId> species, std::vector<Reaction> reactions,
                                 std::map<std::size_t, std::string> labels)
    : species_(std::move(species)), reactions_(std::move(reactions)), labels_(std::move(labels)) {}

std::optional<std::size_t> ReactionNetwork::index_of(const SpeciesId& s) const {
    auto it = std::find(species_.begin(), species_.end(), s);
    if (it == species_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - species_.begin());
}

std::size_t ReactionNetwork::require_index(const SpeciesId& s) const {
    auto idx = index_of(s);
    if (!idx) throw ContractViolation("species '" + s.name() + "' not declared in network");
    return *idx;
}

std::vector<Violation> validate_network(const ReactionNetwork& net) {
    std::vector<Violation> out;
    std::set<SpeciesId> declared;
    for (const auto& s : net.species()) {
        if (!declared.insert(s).second)
            out.push_back({std::nullopt, "duplicate species '" + s.name() + "'"});
    }
    for (std::size_t j = 0; j < net.reactions().size(); ++j) {
        const auto& rx = net.reactions()[j];
        if (!(rx.rate_constant >= 0) || !std::isfinite(rx.rate_constant))
            out.push_back({j, "rate constant must be finite and non-negative"});
        if (rx.reactants.empty())
            out.push_back({j, "reaction has no reactants (spontaneous creation is not allowed)"});
        std::set<SpeciesId> reported;
        for (const auto* side : {&rx.reactants, &rx.products}) {
            for (const auto& s : *side) {
                if (!declared.count(s) && reported.insert(s).second)
                    out.push_back({j, "undeclared species '" + s.name() + "'"});
            }
        }
    }
    for (const auto& [idx, _] : net.labels()) {
        if (idx >= net.reactions().size())
            out.push_back({std::nullopt, "label refers to missing reaction " + std::to_string(idx)});
    }
    return out;
}

namespace {

template <typename Amount>
Amount lookup(const BasicChemState<Amount>& s, const SpeciesId& id) {
    auto it = s.amounts().find(id);
    if (it == s.amounts().end())
        throw ContractViolation("species '" + id.name() + "' is not bound in the state");
    return it->second;
}

std::map<SpeciesId, std::uint32_t> multiplicities(const std::vector<SpeciesId>& side) {
    std::map<SpeciesId, std::uint32_t> m;
    for (const auto& s : side) ++m[s];
    return m;
}

// Number of unordered ways to pick `m` molecules out of `x`, i.e. C(x, m).
double choose(std::uint64_t x, std::uint32_t m) {
    if (x < m) return 0.0;
    double r = 1.0;
    for (std::uint32_t i = 0; i < m; ++i) r *= static_cast<double>(x - i) / static_cast<double>(i + 1);
    return r;
}

}  // namespace

double deterministic_rate(const Reaction& rx, const ContinuousState& s) {
    double r = rx.rate_constant;
    for (const auto& sp : rx.reactants) r *= lookup(s, sp);
    return r;
}

double stochastic_propensity(const Reaction& rx, const DiscreteState& s) {
    if (rx.reactants.empty())
        throw ContractViolation("zero-reactant reactions are not supported");
    double a = rx.rate_constant;
    for (const auto& [sp, m] : multiplicities(rx.reactants)) a *= choose(lookup(s, sp), m);
    return a;
}

DiscreteState apply_reaction(const DiscreteState& s, const Reaction& rx) {
    DiscreteState out = s;
    for (const auto& [sp, m] : multiplicities(rx.reactants)) {
        auto have = lookup(s, sp);
        if (have < m)
            throw ContractViolation("insufficient '" + sp.name() + "' to fire reaction");
        out.set(sp, have - m);
    }
    for (const auto& sp : rx.products) {
        if (!out.contains(sp))
            throw ContractViolation("species '" + sp.name() + "' is not bound in the state");
        out.set(sp, out.amount(sp) + 1);
    }
    return out;
}

std::vector<std::vector<std::int64_t>> stoichiometric_matrix(const ReactionNetwork& net) {
    const auto n = net.species().size();
    const auto r = net.reactions().size();
    std::vector<std::vector<std::int64_t>> m(n, std::vector<std::int64_t>(r, 0));
    for (std::size_t j = 0; j < r; ++j) {
        for (const auto& s : net.reactions()[j].reactants) --m[net.require_index(s)][j];
        for (const auto& s : net.reactions()[j].products) ++m[net.require_index(s)][j];
    }
    return m;
}

namespace {

struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den < 0) { num = -num; den = -den; }
        auto g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    bool zero() const { return num == 0; }
    friend Fraction operator-(Fraction a, Fraction b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
    friend Fraction operator*(Fraction a, Fraction b) { return {a.num * b.num, a.den * b.den}; }
    friend Fraction operator/(Fraction a, Fraction b) { return {a.num * b.den, a.den * b.num}; }
};

}  // namespace

std::vector<std::vector<std::int64_t>> conservation_laws(const ReactionNetwork& net) {
    // Null space of N^T (reactions x species) by exact reduced row echelon form.
    const auto stoich = stoichiometric_matrix(net);
    const auto n = net.species().size();
    const auto r = net.reactions().size();
    std::vector<std::vector<Fraction>> a(r, std::vector<Fraction>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r; ++j) a[j][i] = Fraction(stoich[i][j]);

    std::vector<std::size_t> pivot_cols;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < r; ++col) {
        std::size_t p = row;
        while (p < r && a[p][col].zero()) ++p;
        if (p == r) continue;
        std::swap(a[p], a[row]);
        const Fraction lead = a[row][col];
        for (auto& v : a[row]) v = v / lead;
        for (std::size_t q = 0; q < r; ++q) {
            if (q == row || a[q][col].zero()) continue;
            const Fraction f = a[q][col];
            for (std::size_t c = 0; c < n; ++c) a[q][c] = a[q][c] - f * a[row][c];
        }
        pivot_cols.push_back(col);
        ++row;
    }

    std::vector<bool> is_pivot(n, false);
    for (auto c : pivot_cols) is_pivot[c] = true;

    std::vector<std::vector<std::int64_t>> laws;
    for (std::size_t free = 0; free < n; ++free) {
        if (is_pivot[free]) continue;
        std::vector<Fraction> v(n, Fraction(0));
        v[free] = Fraction(1);
        for (std::size_t k = 0; k < pivot_cols.size(); ++k) v[pivot_cols[k]] = Fraction(0) - a[k][free];

        std::int64_t lcm = 1;
        for (const auto& f : v) lcm = std::lcm(lcm, f.den);
        std::vector<std::int64_t> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = v[i].num * (lcm / v[i].den);
        std::int64_t g = 0;
        for (auto x : w) g = std::gcd(g, x);
        if (g > 1)
            for (auto& x : w) x /= g;
        // prefer a non-negative leading entry
        auto first = std::find_if(w.begin(), w.end(), [](auto x) { return x != 0; });
        if (first != w.end() && *first < 0)
            for (auto& x : w) x = -x;
        laws.push_back(std::move(w));
    }
    return laws;
}

CompiledNetwork CompiledNetwork::compile(const ReactionNetwork& net) {
    auto violations = validate_network(net);
    if (!violations.empty()) throw ContractViolation("invalid network: " + violations.front().message);

    CompiledNetwork c;
    c.species = net.species();
    c.dependents.resize(c.species.size());
    for (std::size_t j = 0; j < net.reactions().size(); ++j) {
        const auto& rx = net.reactions()[j];
        CompiledReaction cr;
        cr.rate_constant = rx.rate_constant;
        std::map<std::uint32_t, std::int64_t> delta;
        for (const auto& [sp, m] : multiplicities(rx.reactants)) {
            auto idx = static_cast<std::uint32_t>(net.require_index(sp));
            cr.reactants.push_back({idx, m});
            delta[idx] -= m;
            c.dependents[idx].push_back(static_cast<std::uint32_t>(j));
        }
        for (const auto& sp : rx.products) ++delta[static_cast<std::uint32_t>(net.require_index(sp))];
        for (const auto& [idx, d] : delta)
            if (d != 0) cr.delta.emplace_back(idx, d);
        c.reactions.push_back(std::move(cr));
    }
    return c;
}

double CompiledNetwork::rate(std::size_t j, std::span<const double> x) const {
    const auto& rx = reactions[j];
    double v = rx.rate_constant;
    for (const auto& t : rx.reactants)
        for (std::uint32_t k = 0; k < t.multiplicity; ++k) v *= x[t.species];
    return v;
}

double CompiledNetwork::propensity(std::size_t j, std::span<const std::uint64_t> x) const {
    const auto& rx = reactions[j];
    double a = rx.rate_constant;
    for (const auto& t : rx.reactants) {
        if (t.multiplicity == 1)
            a *= static_cast<double>(x[t.species]);
        else
            a *= choose(x[t.species], t.multiplicity);
    }
    return a;
}

template <typename Amount>
std::vector<Amount> CompiledNetwork::dense(const BasicChemState<Amount>& s) const {
    if (s.size() != species.size())
        throw ContractViolation("state does not match the network's species set");
    std::vector<Amount> x;
    x.reserve(species.size());
    for (const auto& sp : species) x.push_back(lookup(s, sp));
    return x;
}

template <typename Amount>
BasicChemState<Amount> CompiledNetwork::state(std::span<const Amount> x) const {
    BasicChemState<Amount> s;
    for (std::size_t i = 0; i < species.size(); ++i) s.set(species[i], x[i]);
    return s;
}

template std::vector<std::uint64_t> CompiledNetwork::dense(const DiscreteState&) const;
template std::vector<double> CompiledNetwork::dense(const ContinuousState&) const;
template DiscreteState CompiledNetwork::state(std::span<const std::uint64_t>) const;
template ContinuousState CompiledNetwork::state(std::span<const double>) const;

}  // namespace chemsical
