#include "chemsical/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <gsl/gsl_randist.h>
#include <gsl/gsl_rng.h>

#include <json.hpp>
#include <set>

#include "chemsical/parallel.hpp"

namespace chemsical {

void SsaOptions::validate() const {
    if (!(t_end > 0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
    if (max_events < 1) throw std::invalid_argument("max_events must be at least 1");
    if (record == RecordMode::sampled_grid && sample_count < 2)
        throw std::invalid_argument("sample_count must be at least 2");
}

namespace {

using Term = CompiledNetwork::Term;

bool has_species(const std::vector<Term>& terms, std::uint32_t s) {
    return std::any_of(terms.begin(), terms.end(), [&](const Term& t) { return t.species == s; });
}

std::int64_t delta_of(const CompiledNetwork::CompiledReaction& rx, std::uint32_t s) {
    for (const auto& [idx, d] : rx.delta)
        if (idx == s) return d;
    return 0;
}

// s -> t with rate linear in s and independent of t.
bool is_conversion(const CompiledNetwork::CompiledReaction& rx, std::uint32_t& from, std::uint32_t& to) {
    if (rx.delta.size() != 2) return false;
    auto [i0, d0] = rx.delta[0];
    auto [i1, d1] = rx.delta[1];
    if (d0 == -1 && d1 == 1) {
        from = i0;
        to = i1;
    } else if (d0 == 1 && d1 == -1) {
        from = i1;
        to = i0;
    } else {
        return false;
    }
    if (has_species(rx.reactants, to)) return false;
    for (const auto& t : rx.reactants)
        if (t.species == from && t.multiplicity != 1) return false;
    return true;
}

}  // namespace

SsaPlan SsaPlan::build(const CompiledNetwork& net, bool aggregate) {
    SsaPlan plan;
    const std::size_t m = net.reactions.size();
    const std::size_t n = net.species.size();
    plan.pool_of_species.assign(n, -1);
    plan.role.assign(m, ReactionRole{});

    if (aggregate) {
        // candidate pairs from conversion reactions
        std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
        for (std::size_t j = 0; j < m; ++j) {
            std::uint32_t from = 0, to = 0;
            if (is_conversion(net.reactions[j], from, to))
                pairs.insert({std::min(from, to), std::max(from, to)});
        }
        std::vector<Pool> pools;
        std::vector<int> owner(n, -1);
        for (auto [a, b] : pairs) {
            if (owner[a] >= 0 || owner[b] >= 0) continue;
            Pool p;
            p.on = a;
            p.off = b;
            bool ok = true;
            for (std::size_t j = 0; j < m && ok; ++j) {
                const auto& rx = net.reactions[j];
                const bool touches = has_species(rx.reactants, a) || has_species(rx.reactants, b) ||
                                     delta_of(rx, a) != 0 || delta_of(rx, b) != 0;
                if (!touches) continue;
                std::uint32_t from = 0, to = 0;
                if (is_conversion(rx, from, to) && ((from == a && to == b) || (from == b && to == a))) {
                    (from == a ? p.to_off : p.to_on).push_back(static_cast<std::uint32_t>(j));
                    for (const auto& t : rx.reactants)
                        if (t.species != from) p.catalysts.push_back(t.species);
                    continue;
                }
                // a reader uses exactly one pool member catalytically, first order
                const bool reads_a = has_species(rx.reactants, a);
                const bool reads_b = has_species(rx.reactants, b);
                if (delta_of(rx, a) != 0 || delta_of(rx, b) != 0 || reads_a == reads_b) {
                    ok = false;
                    break;
                }
                const auto s = reads_a ? a : b;
                for (const auto& t : rx.reactants)
                    if (t.species == s && t.multiplicity != 1) ok = false;
                p.readers.push_back(static_cast<std::uint32_t>(j));
            }
            if (!ok || p.to_on.empty() || p.to_off.empty() || p.readers.empty()) continue;
            const auto idx = static_cast<int>(pools.size());
            owner[a] = owner[b] = idx;
            pools.push_back(std::move(p));
        }

        // catalysts must not be pool members; readers must read a single pool
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < pools.size(); ++i) {
                auto& p = pools[i];
                if (p.on == p.off) continue;  // dropped
                bool bad = std::any_of(p.catalysts.begin(), p.catalysts.end(),
                                       [&](std::uint32_t c) { return owner[c] >= 0; });
                for (auto j : p.readers) {
                    int count = 0;
                    for (const auto& t : net.reactions[j].reactants)
                        if (owner[t.species] >= 0) ++count;
                    if (count != 1) bad = true;
                }
                if (bad) {
                    owner[p.on] = owner[p.off] = -1;
                    p.off = p.on;
                    changed = true;
                }
            }
        }
        for (auto& p : pools) {
            if (p.on == p.off) continue;
            const auto idx = static_cast<int>(plan.pools.size());
            plan.pool_of_species[p.on] = plan.pool_of_species[p.off] = idx;
            std::sort(p.catalysts.begin(), p.catalysts.end());
            p.catalysts.erase(std::unique(p.catalysts.begin(), p.catalysts.end()), p.catalysts.end());
            for (auto j : p.to_on) plan.role[j].kind = ReactionRole::conversion;
            for (auto j : p.to_off) plan.role[j].kind = ReactionRole::conversion;
            for (auto j : p.readers) {
                plan.role[j].kind = ReactionRole::reader;
                plan.role[j].pool = idx;
                for (const auto& t : net.reactions[j].reactants)
                    if (t.species == p.on || t.species == p.off) plan.role[j].read_species = t.species;
            }
            plan.pools.push_back(std::move(p));
        }

        // pair readers that differ only in which pool member they read
        auto rest = [&](std::uint32_t j) {
            std::vector<Term> r;
            for (const auto& t : net.reactions[j].reactants)
                if (plan.pool_of_species[t.species] < 0) r.push_back(t);
            return r;
        };
        auto same_terms = [](const std::vector<Term>& x, const std::vector<Term>& y) {
            return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const Term& a, const Term& b) {
                return a.species == b.species && a.multiplicity == b.multiplicity;
            });
        };
        for (const auto& p : plan.pools) {
            for (auto j : p.readers) {
                auto& rj = plan.role[j];
                if (rj.read_species != p.on || rj.partner >= 0) continue;
                for (auto k : p.readers) {
                    auto& rk = plan.role[k];
                    if (rk.read_species != p.off || rk.kind != ReactionRole::reader || rk.partner >= 0)
                        continue;
                    if (net.reactions[j].rate_constant != net.reactions[k].rate_constant) continue;
                    if (!same_terms(rest(j), rest(k))) continue;
                    rj.partner = static_cast<int>(k);
                    rk.partner = static_cast<int>(j);
                    rk.kind = ReactionRole::shadow;
                    break;
                }
            }
        }
    }

    // reactions to refresh after each firing, and pools whose rates it changes
    plan.affected.resize(m);
    plan.touched_pools.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<bool> seen(m, false);
        for (const auto& [idx, d] : net.reactions[j].delta) {
            for (auto k : net.dependents[idx])
                if (!seen[k] && plan.role[k].kind != ReactionRole::conversion) {
                    seen[k] = true;
                    plan.affected[j].push_back(k);
                }
            for (std::size_t p = 0; p < plan.pools.size(); ++p) {
                const auto& cat = plan.pools[p].catalysts;
                if (std::binary_search(cat.begin(), cat.end(), idx))
                    plan.touched_pools[j].push_back(static_cast<std::uint32_t>(p));
            }
        }
        auto& tp = plan.touched_pools[j];
        std::sort(tp.begin(), tp.end());
        tp.erase(std::unique(tp.begin(), tp.end()), tp.end());
    }
    return plan;
}

namespace {

using ReactionRole = SsaPlan::ReactionRole;

// Lets GSL samplers draw from a StreamRng.
struct GslAdapter {
    StreamRng* rng;
};
void gsl_set(void*, unsigned long) {}
unsigned long gsl_get(void* s) { return (*static_cast<GslAdapter*>(s)->rng)() >> 32; }
double gsl_get_double(void* s) { return static_cast<GslAdapter*>(s)->rng->uniform(); }
const gsl_rng_type kStreamRngType = {"stream", 0xffffffffUL, 0, sizeof(GslAdapter),
                                     &gsl_set, &gsl_get, &gsl_get_double};

class Simulator {
public:
    Simulator(const CompiledNetwork& net, const SsaPlan& plan, std::vector<std::uint64_t> x,
              RandomSeed seed, const SsaOptions& opts)
        : net_(net), plan_(plan), opts_(opts), x_(std::move(x)), rng_(seed) {
        pools_.resize(plan.pools.size());
        for (std::size_t p = 0; p < pools_.size(); ++p) {
            const auto& pl = plan.pools[p];
            pools_[p].total = x_[pl.on] + x_[pl.off];
            refresh_rates(p);
        }
        const std::size_t m = net.reactions.size();
        a_.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) a_[j] = bound_propensity(j);
    }

    DiscreteTrajectory run() {
        DiscreteTrajectory traj;
        traj.species = net_.species;
        traj.times.push_back(0.0);
        traj.states.push_back(x_);

        const double t_end = opts_.t_end;
        std::size_t next_sample = 1;
        const auto grid_time = [&](std::size_t i) {
            return i + 1 == opts_.sample_count
                       ? t_end
                       : t_end * static_cast<double>(i) / static_cast<double>(opts_.sample_count - 1);
        };
        auto record_until = [&](double t_limit) {
            if (opts_.record != RecordMode::sampled_grid) return;
            while (next_sample < opts_.sample_count && grid_time(next_sample) <= t_limit) {
                const double tg = grid_time(next_sample++);
                materialize_all(tg);
                traj.times.push_back(tg);
                traj.states.push_back(x_);
            }
        };

        double t = 0;
        traj.reason = StopReason::t_end;
        for (;;) {
            double total = 0;
            for (double v : a_) total += v;
            if (!(total > 0)) {
                // pools may still be flipping; they are then observed at t_end
                if (pools_flipping()) {
                    record_until(t_end);
                    t = t_end;
                } else {
                    traj.reason = StopReason::absorbing;
                    record_until(t_end);
                }
                break;
            }
            const double t_next = t - std::log(rng_.uniform_open0()) / total;
            if (t_next > t_end) {
                record_until(t_end);
                t = t_end;
                break;
            }
            if (opts_.record == RecordMode::sampled_grid) record_until(std::nextafter(t_next, 0.0));
            t = t_next;

            const std::size_t j = select(total);
            const auto& role = plan_.role[j];
            if (role.kind == ReactionRole::reader) {
                auto& pool = pools_[static_cast<std::size_t>(role.pool)];
                materialize(static_cast<std::size_t>(role.pool), t);
                const double accept = static_cast<double>(x_[role.read_species]) /
                                      static_cast<double>(pool.total);
                if (!(rng_.uniform() < accept)) {
                    if (role.partner < 0) continue;  // thinned
                    fire(static_cast<std::size_t>(role.partner), t);
                } else {
                    fire(j, t);
                }
            } else {
                fire(j, t);
            }
            ++traj.events;

            if (opts_.record == RecordMode::event_log) {
                materialize_all(t);
                traj.times.push_back(t);
                traj.states.push_back(x_);
            }
            if (traj.events >= opts_.max_events) {
                traj.reason = StopReason::max_events;
                break;
            }
        }

        if (opts_.record == RecordMode::final_state && t > 0) {
            materialize_all(t);
            traj.times.push_back(t);
            traj.states.push_back(x_);
        } else {
            materialize_all(t);
        }
        return traj;
    }

private:
    struct PoolState {
        std::uint64_t total = 0;
        double last = 0;      // end of the folded interval
        double rate_on = 0;   // per-molecule off -> on
        double rate_off = 0;  // per-molecule on -> off
        double stay_on = 1;   // pending P(on | was on)
        double turn_on = 0;   // pending P(on | was off)
    };

    // Propensity with any pool member replaced by its pool total.
    double bound_propensity(std::size_t j) const {
        const auto& rx = net_.reactions[j];
        const auto& role = plan_.role[j];
        if (role.kind == ReactionRole::conversion || role.kind == ReactionRole::shadow) return 0.0;
        double a = rx.rate_constant;
        for (const auto& term : rx.reactants) {
            std::uint64_t v = x_[term.species];
            if (role.kind == ReactionRole::reader && term.species == role.read_species)
                v = pools_[static_cast<std::size_t>(role.pool)].total;
            if (term.multiplicity == 1) {
                a *= static_cast<double>(v);
            } else {
                double c = 1.0;
                for (std::uint32_t i = 0; i < term.multiplicity; ++i)
                    c *= v >= i ? static_cast<double>(v - i) / static_cast<double>(i + 1) : 0.0;
                a *= c;
            }
        }
        return a;
    }

    double per_molecule_rate(std::uint32_t j, std::uint32_t from) const {
        const auto& rx = net_.reactions[j];
        double r = rx.rate_constant;
        for (const auto& term : rx.reactants) {
            if (term.species == from) continue;
            double c = 1.0;
            const auto v = x_[term.species];
            for (std::uint32_t i = 0; i < term.multiplicity; ++i)
                c *= v >= i ? static_cast<double>(v - i) / static_cast<double>(i + 1) : 0.0;
            r *= c;
        }
        return r;
    }

    void refresh_rates(std::size_t p) {
        const auto& pl = plan_.pools[p];
        auto& st = pools_[p];
        st.rate_on = 0;
        st.rate_off = 0;
        for (auto j : pl.to_on) st.rate_on += per_molecule_rate(j, pl.off);
        for (auto j : pl.to_off) st.rate_off += per_molecule_rate(j, pl.on);
    }

    bool pools_flipping() const {
        for (std::size_t p = 0; p < pools_.size(); ++p) {
            const auto& st = pools_[p];
            const auto& pl = plan_.pools[p];
            if ((st.rate_on > 0 && x_[pl.off] > 0) || (st.rate_off > 0 && x_[pl.on] > 0)) return true;
        }
        return false;
    }

    // Folds [last, t] into the pending per-molecule transition. Molecules are
    // independent two-state chains, so segments with different rates compose
    // as 2x2 stochastic matrices.
    void advance(std::size_t p, double t) {
        auto& st = pools_[p];
        const double dt = t - st.last;
        st.last = t;
        const double r = st.rate_on + st.rate_off;
        if (!(dt > 0) || !(r > 0)) return;
        const double decay = std::exp(-r * dt);
        const double stay_on = (st.rate_on + st.rate_off * decay) / r;
        const double turn_on = st.rate_on * (1.0 - decay) / r;
        st.stay_on = st.stay_on * stay_on + (1.0 - st.stay_on) * turn_on;
        st.turn_on = st.turn_on * stay_on + (1.0 - st.turn_on) * turn_on;
    }

    void materialize(std::size_t p, double t) {
        advance(p, t);
        auto& st = pools_[p];
        if (st.stay_on == 1.0 && st.turn_on == 0.0) return;
        const auto& pl = plan_.pools[p];
        const std::uint64_t on = x_[pl.on];
        const std::uint64_t off = st.total - on;
        std::uint64_t next = 0;
        if (on > 0) next += binomial(std::clamp(st.stay_on, 0.0, 1.0), on);
        if (off > 0) next += binomial(std::clamp(st.turn_on, 0.0, 1.0), off);
        x_[pl.on] = next;
        x_[pl.off] = st.total - next;
        st.stay_on = 1.0;
        st.turn_on = 0.0;
    }

    std::uint64_t binomial(double p, std::uint64_t n) {
        return gsl_ran_binomial(&gsl_, p, static_cast<unsigned int>(n));
    }

    void materialize_all(double t) {
        for (std::size_t p = 0; p < pools_.size(); ++p) materialize(p, t);
    }

    std::size_t select(double total) {
        double r = rng_.uniform() * total;
        const std::size_t m = a_.size();
        std::size_t j = 0;
        for (; j + 1 < m; ++j) {
            if (a_[j] > 0 && r < a_[j]) break;
            r -= a_[j];
        }
        while (a_[j] <= 0) --j;  // rounding past the last positive entry
        return j;
    }

    void fire(std::size_t j, double t) {
        const auto& touched = plan_.touched_pools[j];
        for (auto p : touched) advance(p, t);
        for (const auto& [idx, d] : net_.reactions[j].delta)
            x_[idx] = static_cast<std::uint64_t>(static_cast<std::int64_t>(x_[idx]) + d);
        for (auto k : plan_.affected[j]) a_[k] = bound_propensity(k);
        for (auto p : touched) refresh_rates(p);
    }

    const CompiledNetwork& net_;
    const SsaPlan& plan_;
    const SsaOptions& opts_;
    std::vector<std::uint64_t> x_;
    std::vector<double> a_;
    std::vector<PoolState> pools_;
    StreamRng rng_;
    GslAdapter adapter_{&rng_};
    gsl_rng gsl_{&kStreamRngType, &adapter_};
};

}  // namespace

DiscreteTrajectory simulate_ssa(const CompiledNetwork& net, const SsaPlan& plan,
                                std::vector<std::uint64_t> x, RandomSeed seed, const SsaOptions& opts) {
    opts.validate();
    if (x.size() != net.species.size())
        throw ContractViolation("initial state does not match network species");
    return Simulator(net, plan, std::move(x), seed, opts).run();
}

DiscreteTrajectory simulate_ssa(const CompiledNetwork& net, std::vector<std::uint64_t> x,
                                RandomSeed seed, const SsaOptions& opts) {
    const auto plan = SsaPlan::build(net, opts.aggregate_pools);
    return simulate_ssa(net, plan, std::move(x), seed, opts);
}

DiscreteTrajectory simulate_ssa(const ReactionNetwork& net, const DiscreteState& init,
                                RandomSeed seed, const SsaOptions& opts) {
    auto compiled = CompiledNetwork::compile(net);
    return simulate_ssa(compiled, compiled.dense(init), seed, opts);
}

EnsembleSummary run_ensemble(const ReactionNetwork& net, const DiscreteState& init,
                             std::size_t n_traj, std::uint64_t base_seed, const SsaOptions& opts,
                             const Readout& readout, unsigned workers) {
    if (n_traj < 1) throw std::invalid_argument("n_traj must be at least 1");
    const auto compiled = CompiledNetwork::compile(net);
    const auto x0 = compiled.dense(init);
    SsaOptions o = opts;
    o.record = RecordMode::final_state;
    o.validate();
    const auto plan = SsaPlan::build(compiled, o.aggregate_pools);

    EnsembleSummary s;
    s.n_traj = n_traj;
    s.species = compiled.species;
    s.final_states.resize(n_traj);
    std::vector<char> truncated(n_traj, 0);
    if (readout) s.labels.resize(n_traj);

    parallel_for(n_traj, workers, [&](std::size_t i) {
        auto traj = simulate_ssa(compiled, plan, x0, RandomSeed{base_seed, i}, o);
        truncated[i] = traj.truncated();
        s.final_states[i] = traj.final_row();
        if (readout) s.labels[i] = readout(traj.final_state());
    });

    const std::size_t n = s.species.size();
    s.mean.assign(n, 0.0);
    s.variance.assign(n, 0.0);
    for (const auto& row : s.final_states)
        for (std::size_t k = 0; k < n; ++k) s.mean[k] += static_cast<double>(row[k]);
    for (auto& v : s.mean) v /= static_cast<double>(n_traj);
    if (n_traj > 1) {
        for (const auto& row : s.final_states)
            for (std::size_t k = 0; k < n; ++k) {
                const double d = static_cast<double>(row[k]) - s.mean[k];
                s.variance[k] += d * d;
            }
        for (auto& v : s.variance) v /= static_cast<double>(n_traj - 1);
    }
    for (std::size_t i = 0; i < n_traj; ++i) {
        s.truncated += truncated[i] ? 1 : 0;
        if (readout) ++s.tallies[s.labels[i]];
    }
    return s;
}

std::string summary_to_json(const EnsembleSummary& summary) {
    nlohmann::json j;
    j["n_traj"] = summary.n_traj;
    j["truncated"] = summary.truncated;
    j["counts"] = nlohmann::json::object();
    for (const auto& [label, count] : summary.tallies) j["counts"][label] = count;
    for (std::size_t k = 0; k < summary.species.size(); ++k) {
        j["mean"][summary.species[k].name()] = summary.mean[k];
        j["variance"][summary.species[k].name()] = summary.variance[k];
    }
    return j.dump(2) + "\n";
}

}  // namespace chemsical
