// Acceptance gate: one PASS/FAIL line per criterion. Baseline scenario and
// receiver parameters match configs/baseline.cfg.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "chemsical/eval.hpp"
#include "chemsical/parallel.hpp"

using namespace chemsical;

namespace {

constexpr std::uint64_t kBaseSeed = 20240501;
constexpr std::size_t kTraj = 200;
constexpr std::uint64_t kStride = 4;
constexpr double kHorizon = 40;

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// independent walk of the two-stage decision tree
DecisionPair walk(std::uint64_t n, const ThresholdSet& th) {
    if (n < th.tau1) return n < th.tau2_0 ? DecisionPair{0, 0} : DecisionPair{0, 1};
    return n < th.tau2_1 ? DecisionPair{1, 0} : DecisionPair{1, 1};
}

SsaOptions ssa_options() {
    SsaOptions o;
    o.t_end = kHorizon;
    return o;
}

struct CurveRun {
    DetectionCurve curve;
    ErrorReport report;
    std::string csv;
};

CurveRun run_curve(const ChemSICalParams& p, const PmfVector& pmf, unsigned workers) {
    CurveRun r;
    r.curve = detection_probability_curve(p, input_grid(p.n_max, kStride), kTraj, kBaseSeed, ssa_options(), workers);
    r.report = weighted_error_probability(r.curve, pmf);
    std::ostringstream os;
    write_pd_csv(os, r.curve, {"acceptance", false});
    r.csv = os.str();
    return r;
}

void criterion1(const ScenarioSignal& sig) {
    const bool ok = std::abs(sig.lambda1 - 308.4) <= 0.5 && std::abs(sig.lambda2 - 159.4) <= 0.5 &&
                    std::abs(sig.t_p * 1e3 - 16.67) < 0.005 && std::abs(sig.lambda1 - 308) < 1.0;
    verdict(1, ok, fmt("t_p = %.4f ms, lambda1 = %.3f, lambda2 = %.3f (tau2_1 - tau2_0 = 308)", sig.t_p * 1e3,
                       sig.lambda1, sig.lambda2));
}

void criterion2() {
    std::size_t mismatches = 0;
    const ThresholdSet th;
    for (std::uint64_t n = 0; n < 600; ++n)
        if (!(sic_oracle(n, th) == walk(n, th))) ++mismatches;
    verdict(2, mismatches == 0, fmt("%zu mismatches over n in [0, 600)", mismatches));
}

void criterion3(unsigned workers) {
    const SpeciesId A("A"), B("B");
    ReactionNetwork net({A, B}, {{{A}, {B}, 1.0}});
    DiscreteState init;
    init.set(A, 100);
    init.set(B, 0);
    const std::size_t n = 10000;
    SsaOptions o;
    o.t_end = 2.0;
    o.record = RecordMode::sampled_grid;
    o.sample_count = 5;  // 0, 0.5, 1, 1.5, 2
    o.aggregate_pools = false;
    std::vector<std::array<double, 3>> b(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const auto tr = simulate_ssa(net, init, {kBaseSeed, i}, o);
        b[i] = {double(tr.states[1][1]), double(tr.states[2][1]), double(tr.states[4][1])};
    });

    OdeOptions oo;
    oo.t_end = 2.0;
    oo.sample_count = 5;
    oo.steady_state_epsilon = 0;
    oo.rel_tol = 1e-10;
    oo.abs_tol = 1e-12;
    const auto ode = simulate_ode(net, to_continuous(init), oo);

    bool ok = true;
    std::string detail;
    const double ts[3] = {0.5, 1.0, 2.0};
    const std::size_t rows[3] = {1, 2, 4};
    double worst_ode = 0;
    for (int k = 0; k < 3; ++k) {
        double s = 0, s2 = 0;
        for (const auto& v : b) {
            s += v[k];
            s2 += v[k] * v[k];
        }
        const double mean = s / n, var = (s2 - n * mean * mean) / (n - 1), se = std::sqrt(var / n);
        const double ode_b = ode.states[rows[k]][1];
        const double analytic = 100 * (1 - std::exp(-ts[k]));
        worst_ode = std::max(worst_ode, std::abs(ode_b - analytic) / 100);
        const double z = (mean - ode_b) / se;
        ok = ok && std::abs(z) <= 3;
        detail += fmt("t=%.1f: SSA %.3f vs ODE %.4f (z = %+.2f); ", ts[k], mean, ode_b, z);
    }
    ok = ok && worst_ode <= 1e-6;
    detail += fmt("max relative ODE error %.1e", worst_ode);
    verdict(3, ok, detail);
}

void criterion4(const ScenarioSignal& sig, unsigned workers) {
    const ChemSICalParams base;
    const std::size_t n = 100;
    std::vector<std::string> problems(n);
    std::vector<std::size_t> points(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const int s1 = int(i & 1), s2 = int((i >> 1) & 1);
        ChemSICalParams p = base;
        p.input_count = std::min<std::uint64_t>(sample_input(sig, s1, s2, {kBaseSeed + 4, i}), p.n_max - 1);
        const auto doc = build_chemsical(p);
        SsaOptions o = ssa_options();
        o.record = RecordMode::event_log;
        const auto tr = simulate_ssa(doc.network, doc.initial, {kBaseSeed + 4, 1000 + i}, o);
        auto col = [&](const SpeciesId& s) {
            return std::size_t(std::find(tr.species.begin(), tr.species.end(), s) - tr.species.begin());
        };
        const auto y = col(species::Y_on), w1 = col(species::W_1), wb = col(species::W_2B);
        const auto on = col(species::X_on1), off = col(species::X_off1);
        points[i] = tr.size();
        for (const auto& row : tr.states) {
            if (row[y] != p.input_count || row[w1] != p.thresholds.tau1 || row[wb] != p.thresholds.tau2_0 ||
                row[on] + row[off] != p.thresholds.stage1_pool()) {
                problems[i] = fmt("trajectory %zu drifted", i);
                break;
            }
        }
    });
    std::size_t bad = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!problems[i].empty()) ++bad;
        total += points[i];
    }
    verdict(4, bad == 0,
            fmt("%zu of %zu trajectories violated a conserved quantity (%zu recorded points checked)", bad, n, total));
}

std::vector<double> criterion5(const PmfVector& pmf, unsigned workers) {
    std::vector<std::uint64_t> inputs(600);
    for (std::uint64_t i = 0; i < 600; ++i) inputs[i] = i;
    OdeOptions o;
    o.t_end = kHorizon;
    std::vector<double> err(6, 0);
    std::size_t failed = 0;
    for (int set = 1; set <= 5; ++set) {
        ChemSICalParams p;
        p.rrc = RrcSet::preset(set);
        const auto prof = ode_error_profile(p, inputs, pmf, o, workers);
        err[set] = prof.weighted_error;
        for (char f : prof.failed) failed += f != 0;
    }
    const bool order = err[5] <= err[4] && err[4] < err[3] && err[3] < err[2] && err[2] <= err[1];
    const bool set1 = std::abs(err[1] - 0.25) <= 0.05;
    const bool set5 = err[5] <= 1e-2;
    const double factor = err[5] > 0 ? std::max(err[5] / 3.98e-4, 3.98e-4 / err[5]) : INFINITY;
    verdict(5, order && set1 && set5 && failed == 0,
            fmt("set1..5 = %.4g, %.4g, %.4g, %.3g, %.3g; ordering %s; set 5 within factor %.1f of 3.98e-4 "
                "(target 5, informational); %zu integration failures",
                err[1], err[2], err[3], err[4], err[5], order ? "holds" : "violated", factor, failed));
    return err;
}

void criterion6() {
    OdeOptions o;
    o.t_end = kHorizon;
    DecisionPair d[2];
    for (int k = 0; k < 2; ++k) {
        ChemSICalParams p;
        p.rrc = RrcSet::preset(k == 0 ? 1 : 5);
        p.input_count = 300;
        const auto doc = build_chemsical(p);
        d[k] = read_decision(steady_state(doc.network, to_continuous(doc.initial), o).state);
    }
    verdict(6, d[0].s2 == 1 && d[1] == DecisionPair{1, 0},
            fmt("input 300: set 1 decides %s, set 5 decides %s", d[0].label().c_str(), d[1].label().c_str()));
}

// inputs where the noiseless (ODE) receiver changes its decision
std::vector<std::uint64_t> de_facto_thresholds(const ChemSICalParams& base, unsigned workers) {
    std::vector<std::uint64_t> inputs(base.n_max);
    for (std::uint64_t i = 0; i < base.n_max; ++i) inputs[i] = i;
    std::vector<std::string> label(inputs.size());
    OdeOptions o;
    o.t_end = kHorizon;
    parallel_for(inputs.size(), workers, [&](std::size_t i) {
        ChemSICalParams p = base;
        p.input_count = inputs[i];
        const auto doc = build_chemsical(p);
        label[i] = read_decision(steady_state(doc.network, to_continuous(doc.initial), o).state).label();
    });
    // an isolated misdecision flips the label twice in a row; switches closer
    // than a few molecules belong to the same threshold
    std::vector<std::vector<std::uint64_t>> groups;
    for (std::size_t i = 1; i < label.size(); ++i) {
        if (label[i] == label[i - 1]) continue;
        if (!groups.empty() && inputs[i] - groups.back().back() <= 5) groups.back().push_back(inputs[i]);
        else groups.push_back({inputs[i]});
    }
    std::vector<std::uint64_t> out;
    for (const auto& g : groups) out.push_back(g.front());
    return out;
}

CurveRun criterion7(const PmfVector& pmf, unsigned workers) {
    const ChemSICalParams base;
    const auto t0 = std::chrono::steady_clock::now();
    auto run = run_curve(base, pmf, workers);
    const double secs = seconds_since(t0);
    const auto& c = run.curve;
    const auto thresholds = de_facto_thresholds(base, workers);

    bool ok = run.report.p_e >= 0.03 && run.report.p_e <= 0.09;
    std::string detail = fmt("P_e = %.4f; ", run.report.p_e);
    std::vector<char> near(c.inputs.size(), 0);
    for (auto th : thresholds) {
        // the lowest P_d within a +-40 window must sit within +-15 of the threshold
        std::size_t best = 0;
        double lo = 2;
        for (std::size_t i = 0; i < c.inputs.size(); ++i) {
            const auto dist = std::abs(double(c.inputs[i]) - double(th));
            if (dist <= 15) near[i] = 1;
            if (dist <= 40 && c.p_d[i] < lo) {
                lo = c.p_d[i];
                best = i;
            }
        }
        const bool hit = std::abs(double(c.inputs[best]) - double(th)) <= 15;
        ok = ok && hit;
        detail += fmt("threshold %llu: minimum P_d %.3f at %llu%s; ", (unsigned long long)th, lo,
                      (unsigned long long)c.inputs[best], hit ? "" : " (outside +-15)");
    }
    ok = ok && thresholds.size() == 3;
    double floor = 1;
    for (std::size_t i = 0; i < c.inputs.size(); ++i)
        if (!near[i]) floor = std::min(floor, c.p_d[i]);
    ok = ok && floor >= 0.45;
    std::size_t truncated = 0;
    for (auto t : c.truncated) truncated += t;
    detail += fmt("min P_d away from thresholds %.3f; %zu truncated; %zu inputs x %zu trajectories in %.0f s",
                  floor, truncated, c.inputs.size(), c.n_traj, secs);
    verdict(7, ok, detail);
    return run;
}

void criterion8(const PmfVector& pmf, double baseline, unsigned workers) {
    ChemSICalParams p;
    p.thresholds = {231, 76, 388};
    const double improved1 = run_curve(p, pmf, workers).report.p_e;
    p.rrc.kappa_AM2 = 1.6e-3;
    const double improved2 = run_curve(p, pmf, workers).report.p_e;
    p.rrc.kappa_AM2 = 3e-3;
    const double fast = run_curve(p, pmf, workers).report.p_e;
    const double r1 = 1 - improved1 / baseline, r2 = 1 - improved2 / improved1;
    const bool ok = r1 >= 0.03 && r2 >= 0.03 && fast > improved2;
    verdict(8, ok,
            fmt("P_e baseline %.4f -> (76,388) %.4f (%.1f%%) -> +kappa_AM2 1.6e-3 %.4f (%.1f%%); kappa_AM2 3e-3 %.4f",
                baseline, improved1, 100 * r1, improved2, 100 * r2, fast));
}

void criterion9(const ScenarioSignal& sig, double baseline_pe, unsigned workers) {
    const ThresholdSet th;
    const double exact = ideal_error_probability(sig, th);
    const std::size_t n = 10'000'000, chunks = 100, per = n / chunks;
    std::vector<double> sum(chunks, 0), sum2(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t c) {
        StreamRng pick({kBaseSeed + 9, c});
        for (std::size_t i = 0; i < per; ++i) {
            const int h = int(pick() >> 62);
            const int s1 = h >> 1, s2 = h & 1;
            const auto x = sample_input(sig, s1, s2, {kBaseSeed + 9, (c + 1) * per + i + 1000});
            const auto d = walk(x, th);
            const double e = ((d.s1 != s1) + (d.s2 != s2)) / 2.0;
            sum[c] += e;
            sum2[c] += e * e;
        }
    });
    double s = 0, s2 = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        s += sum[c];
        s2 += sum2[c];
    }
    const double mean = s / n, se = std::sqrt(std::max(s2 / n - mean * mean, 0.0) / (n - 1));
    const double z = se > 0 ? (mean - exact) / se : (mean == exact ? 0 : INFINITY);
    const bool ok = std::abs(z) <= 3 && exact >= 1e-7 && exact <= 1e-4 && 100 * exact <= baseline_pe;
    verdict(9, ok,
            fmt("exact %.3e, Monte Carlo %.3e +- %.1e over 1e7 samples (z = %+.2f); SSA P_e / ideal = %.0f", exact,
                mean, se, z, baseline_pe / exact));
}

void criterion10(const PmfVector& pmf, const CurveRun& first, unsigned workers) {
    const unsigned other = workers == 1 ? 3 : 1;
    const auto again = run_curve(ChemSICalParams{}, pmf, other);
    verdict(10, again.csv == first.csv,
            fmt("P_d CSV (%zu bytes) rerun with %u workers instead of %u is %s", first.csv.size(), other, workers,
                again.csv == first.csv ? "byte-identical" : "different"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    unsigned workers = 0;
    app.add_option("--workers", workers, "parallel workers (0 = all cores)");
    CLI11_PARSE(app, argc, argv);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

    try {
        const auto sig = scenario_signal({});
        const auto pmf = input_pmf(sig, 600);
        criterion1(sig);
        criterion2();
        criterion3(workers);
        criterion4(sig, workers);
        criterion5(pmf, workers);
        criterion6();
        const auto baseline = criterion7(pmf, workers);
        criterion8(pmf, baseline.report.p_e, workers);
        criterion9(sig, baseline.report.p_e, workers);
        criterion10(pmf, baseline, workers);
    } catch (const std::exception& e) {
        std::printf("FAIL aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
