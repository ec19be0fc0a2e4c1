#include <doctest.h>

#include <cmath>

#include "chemsical/builder.hpp"
#include "chemsical/ssa.hpp"

using namespace chemsical;

namespace {

SpeciesId S(const char* n) { return SpeciesId(n); }

DiscreteState dstate(std::initializer_list<std::pair<const char*, std::uint64_t>> v) {
    DiscreteState s;
    for (auto& [k, x] : v) s.set(S(k), x);
    return s;
}

struct Moments {
    double mean = 0, var = 0;
};

template <typename F>
Moments moments(std::size_t n, F&& sample) {
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample(i);
        s += x;
        s2 += x * x;
    }
    Moments m;
    m.mean = s / n;
    m.var = (s2 - n * m.mean * m.mean) / (n - 1);
    return m;
}

// time of the first event in an event log
double first_event_time(const ReactionNetwork& net, const DiscreteState& init, RandomSeed seed) {
    SsaOptions o;
    o.t_end = 1e9;
    o.record = RecordMode::event_log;
    o.max_events = 1;
    const auto tr = simulate_ssa(net, init, seed, o);
    REQUIRE(tr.size() >= 2);
    return tr.times[1];
}

}  // namespace

TEST_CASE("single decay is Exp(1)") {
    ReactionNetwork net({S("A")}, {{{S("A")}, {}, 1.0}});
    const auto m = moments(10000, [&](std::size_t i) {
        SsaOptions o;
        o.t_end = 1e9;
        o.record = RecordMode::event_log;
        const auto tr = simulate_ssa(net, dstate({{"A", 1}}), {11, i}, o);
        CHECK(tr.reason == StopReason::absorbing);
        return tr.times[1];
    });
    CHECK(std::abs(m.mean - 1.0) < 0.03);
    CHECK(std::abs(m.var - 1.0) < 0.1);
}

TEST_CASE("waiting time of a bimolecular reaction") {
    ReactionNetwork net({S("A"), S("B"), S("C")}, {{{S("A"), S("B")}, {S("C")}, 0.01}});
    const double rate = 0.01 * 5 * 7;
    const std::size_t n = 10000;
    const auto m = moments(n, [&](std::size_t i) {
        return first_event_time(net, dstate({{"A", 5}, {"B", 7}, {"C", 0}}), {5, i});
    });
    CHECK(std::abs(m.mean - 1 / rate) < 3 * std::sqrt(m.var / n));
}

TEST_CASE("determinism") {
    ChemSICalParams p;
    p.input_count = 250;
    const auto doc = build_chemsical(p);
    SsaOptions o;
    o.t_end = 10;
    o.record = RecordMode::sampled_grid;
    o.sample_count = 21;
    const auto a = simulate_ssa(doc.network, doc.initial, {3, 4}, o);
    const auto b = simulate_ssa(doc.network, doc.initial, {3, 4}, o);
    CHECK(a.states == b.states);
    CHECK(a.times == b.times);
    CHECK(a.events == b.events);
    const auto c = simulate_ssa(doc.network, doc.initial, {3, 5}, o);
    CHECK(a.states != c.states);
}

TEST_CASE("mean of A -> B matches the ODE") {
    ReactionNetwork net({S("A"), S("B")}, {{{S("A")}, {S("B")}, 1.0}});
    const std::size_t n = 4000;
    for (bool aggregate : {true, false}) {
        SsaOptions o;
        o.t_end = 1.0;
        o.aggregate_pools = aggregate;
        const auto m = moments(n, [&](std::size_t i) {
            return static_cast<double>(
                simulate_ssa(net, dstate({{"A", 100}, {"B", 0}}), {8, i}, o).final_amount(S("B")));
        });
        const double expect = 100 * (1 - std::exp(-1.0));
        CHECK(std::abs(m.mean - expect) < 3 * std::sqrt(m.var / n));
    }
}

TEST_CASE("approximate majority favours the larger side") {
    ReactionNetwork net({S("D1"), S("D0"), S("B")},
                        build_approximate_majority_block(S("D1"), S("D0"), S("B"), 0.1));
    SsaOptions o;
    o.t_end = 1e6;
    const auto sum = run_ensemble(net, dstate({{"D1", 60}, {"D0", 40}, {"B", 0}}), 200, 9, o,
                                  [](const DiscreteState& s) {
                                      return s.amount(S("D1")) > s.amount(S("D0")) ? "1" : "0";
                                  });
    CHECK(sum.tallies.at("1") > 190);
    for (const auto& row : sum.final_states) CHECK(row[0] + row[1] + row[2] == 100);
}

TEST_CASE("stops when no reaction can fire") {
    ReactionNetwork net({S("A"), S("B")}, {{{S("A")}, {S("B")}, 1.0}});
    SsaOptions o;
    o.t_end = 1e9;
    const auto tr = simulate_ssa(net, dstate({{"A", 5}, {"B", 0}}), {1, 1}, o);
    CHECK(tr.reason == StopReason::absorbing);
    CHECK(tr.final_amount(S("B")) == 5);
    CHECK(tr.events == 5);
}

TEST_CASE("max_events flags truncation") {
    ReactionNetwork net({S("A"), S("B")}, {{{S("A")}, {S("B")}, 1.0}, {{S("B")}, {S("A")}, 1.0}});
    SsaOptions o;
    o.t_end = 1e9;
    o.max_events = 50;
    const auto tr = simulate_ssa(net, dstate({{"A", 5}, {"B", 0}}), {1, 1}, o);
    CHECK(tr.truncated());
    CHECK(tr.events == 50);
}

TEST_CASE("ensembles do not depend on the worker count") {
    ChemSICalParams p;
    p.input_count = 160;
    const auto doc = build_chemsical(p);
    SsaOptions o;
    o.t_end = 5;
    const auto readout = [](const DiscreteState& s) { return read_decision(s).label(); };
    const auto a = run_ensemble(doc.network, doc.initial, 24, 77, o, readout, 1);
    const auto b = run_ensemble(doc.network, doc.initial, 24, 77, o, readout, 4);
    CHECK(a == b);
    std::size_t total = 0;
    for (auto& [k, v] : a.tallies) total += v;
    CHECK(total == 24);

    const auto one = run_ensemble(doc.network, doc.initial, 1, 77, o);
    CHECK(one.variance == std::vector<double>(one.species.size(), 0.0));
    CHECK(one.mean.size() == one.species.size());
    CHECK(summary_to_json(one).find("\"n_traj\"") != std::string::npos);
}

TEST_CASE("pool detection") {
    ChemSICalParams p;
    p.translation = TranslationStrategy::copy;
    auto net = CompiledNetwork::compile(build_chemsical(p).network);
    auto plan = SsaPlan::build(net, true);
    CHECK(plan.pools.size() == 2);
    CHECK(SsaPlan::build(net, false).pools.empty());

    p.translation = TranslationStrategy::transfer;
    net = CompiledNetwork::compile(build_chemsical(p).network);
    CHECK(SsaPlan::build(net, true).pools.empty());
}

TEST_CASE("aggregated and plain simulation agree in distribution") {
    // a single copy-translated comparison stage
    const auto Y = S("Y"), W = S("W"), Xon = S("Xon"), Xoff = S("Xoff"), D1 = S("D1"), D0 = S("D0");
    auto rx = build_comparison_block(Y, W, Xon, Xoff, 1.0);
    for (auto& r : build_translation_block(Xon, Xoff, D1, D0, 0.1, TranslationStrategy::copy)) rx.push_back(r);
    ReactionNetwork net({Y, W, Xon, Xoff, D1, D0}, rx);
    REQUIRE(SsaPlan::build(CompiledNetwork::compile(net), true).pools.size() == 1);
    const auto init = dstate({{"Y", 12}, {"W", 8}, {"Xon", 0}, {"Xoff", 20}, {"D1", 0}, {"D0", 0}});
    const std::size_t n = 6000;
    for (double t : {0.3, 3.0}) {
        Moments m[2][2];
        for (int agg = 0; agg < 2; ++agg) {
            SsaOptions o;
            o.t_end = t;
            o.aggregate_pools = agg == 1;
            std::vector<double> xon(n), d1(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto tr = simulate_ssa(net, init, {static_cast<std::uint64_t>(100 + agg), i}, o);
                xon[i] = static_cast<double>(tr.final_amount(Xon));
                d1[i] = static_cast<double>(tr.final_amount(D1));
                CHECK(tr.final_amount(Xon) + tr.final_amount(Xoff) == 20);
            }
            m[agg][0] = moments(n, [&](std::size_t i) { return xon[i]; });
            m[agg][1] = moments(n, [&](std::size_t i) { return d1[i]; });
        }
        for (int k = 0; k < 2; ++k) {
            const double se = std::sqrt(m[0][k].var / n + m[1][k].var / n);
            CHECK(std::abs(m[0][k].mean - m[1][k].mean) < 4 * se);
            CHECK(m[0][k].var == doctest::Approx(m[1][k].var).epsilon(0.1));
        }
        // stationary X_on is Binomial(20, 12/20)
        if (t > 1) CHECK(std::abs(m[1][0].mean - 12.0) < 0.2);
    }
}

TEST_CASE("option validation") {
    SsaOptions o;
    o.t_end = 0;
    CHECK_THROWS(o.validate());
    o = {};
    o.record = RecordMode::sampled_grid;
    o.sample_count = 1;
    CHECK_THROWS(o.validate());
}
