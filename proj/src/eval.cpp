#include "chemsical/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "chemsical/parallel.hpp"

namespace chemsical {

DecisionPair sic_oracle(std::uint64_t n, const ThresholdSet& th) {
    const int s1 = n >= th.tau1 ? 1 : 0;
    const int s2 = n >= (s1 ? th.tau2_1 : th.tau2_0) ? 1 : 0;
    return {s1, s2};
}

int correct_detection(const DecisionPair& chem, const DecisionPair& oracle) {
    return chem == oracle ? 1 : 0;
}

std::vector<std::uint64_t> input_grid(std::uint64_t n_max, std::uint64_t stride) {
    if (stride < 1) throw std::invalid_argument("stride must be at least 1");
    std::vector<std::uint64_t> out;
    for (std::uint64_t n = 0; n < n_max; n += stride) out.push_back(n);
    return out;
}

OdeProfile ode_error_profile(const ChemSICalParams& base, const std::vector<std::uint64_t>& inputs,
                             const PmfVector& pmf, const OdeOptions& opts, unsigned workers) {
    base.thresholds.validate();
    base.rrc.validate();
    opts.validate();
    OdeProfile prof;
    prof.inputs = inputs;
    const std::size_t k = inputs.size();
    prof.correct.assign(k, 0);
    prof.failed.assign(k, 0);
    prof.contribution.assign(k, 0.0);
    std::vector<std::string> messages(k);

    parallel_for(k, workers, [&](std::size_t i) {
        ChemSICalParams p = base;
        p.input_count = inputs[i];
        try {
            const auto doc = build_chemsical(p);
            const auto ss = steady_state(doc.network, to_continuous(doc.initial), opts);
            prof.correct[i] = correct_detection(read_decision(ss.state), sic_oracle(inputs[i], p.thresholds));
        } catch (const IntegrationError& e) {
            prof.failed[i] = 1;
            messages[i] = "input " + std::to_string(inputs[i]) + ": " + e.what();
        }
    });

    for (std::size_t i = 0; i < k; ++i) {
        if (prof.failed[i]) {
            prof.warnings.push_back(messages[i]);
            continue;
        }
        const double w = inputs[i] < pmf.p.size() ? pmf.p[inputs[i]] : 0.0;
        prof.contribution[i] = w * (1 - prof.correct[i]);
        prof.weighted_error += prof.contribution[i];
    }
    return prof;
}

double wilson_stderr(std::size_t successes, std::size_t trials) {
    if (trials == 0) return 0.0;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    return std::sqrt(n * p * (1 - p) + 0.25) / (n + 1);
}

DetectionCurve detection_probability_curve(const ChemSICalParams& base,
                                           const std::vector<std::uint64_t>& inputs,
                                           std::size_t n_traj, std::uint64_t base_seed,
                                           const SsaOptions& opts, unsigned workers) {
    if (n_traj < 1) throw std::invalid_argument("n_traj must be at least 1");
    if (!std::is_sorted(inputs.begin(), inputs.end()) ||
        std::adjacent_find(inputs.begin(), inputs.end()) != inputs.end())
        throw std::invalid_argument("inputs must be strictly increasing");
    SsaOptions o = opts;
    o.record = RecordMode::final_state;
    o.validate();

    struct Prepared {
        CompiledNetwork net;
        SsaPlan plan;
        std::vector<std::uint64_t> x0;
        DecisionPair oracle;
    };
    std::vector<Prepared> prepared;
    prepared.reserve(inputs.size());
    for (auto n : inputs) {
        ChemSICalParams p = base;
        p.input_count = n;
        const auto doc = build_chemsical(p);
        auto net = CompiledNetwork::compile(doc.network);
        auto plan = SsaPlan::build(net, o.aggregate_pools);
        auto x0 = net.dense(doc.initial);
        prepared.push_back({std::move(net), std::move(plan), std::move(x0), sic_oracle(n, p.thresholds)});
    }

    const std::size_t k = inputs.size();
    std::vector<char> correct(k * n_traj, 0);
    std::vector<char> truncated(k * n_traj, 0);
    parallel_for(k * n_traj, workers, [&](std::size_t task) {
        const std::size_t i = task / n_traj;
        const std::size_t r = task % n_traj;
        const auto& pr = prepared[i];
        const RandomSeed seed{derive_seed(base_seed, inputs[i]), r};
        const auto traj = simulate_ssa(pr.net, pr.plan, pr.x0, seed, o);
        if (traj.truncated()) {
            truncated[task] = 1;
            return;
        }
        const auto row = traj.final_row();
        std::vector<double> as_double(row.begin(), row.end());
        correct[task] = static_cast<char>(correct_detection(read_decision(pr.net.species, as_double), pr.oracle));
    });

    DetectionCurve curve;
    curve.inputs = inputs;
    curve.n_traj = n_traj;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t ok = 0, cut = 0;
        for (std::size_t r = 0; r < n_traj; ++r) {
            ok += correct[i * n_traj + r];
            cut += truncated[i * n_traj + r];
        }
        curve.p_d.push_back(static_cast<double>(ok) / static_cast<double>(n_traj));
        curve.stderr_.push_back(wilson_stderr(ok, n_traj));
        curve.truncated.push_back(cut);
    }
    return curve;
}

ErrorReport weighted_error_probability(const DetectionCurve& curve, const PmfVector& pmf) {
    const auto& xs = curve.inputs;
    if (xs.empty()) throw std::invalid_argument("detection curve is empty");
    if (curve.p_d.size() != xs.size()) throw std::invalid_argument("detection curve lengths differ");
    if (!std::is_sorted(xs.begin(), xs.end()) || std::adjacent_find(xs.begin(), xs.end()) != xs.end())
        throw std::invalid_argument("curve inputs must be strictly increasing");
    if (xs.back() >= pmf.p.size())
        throw std::invalid_argument("curve input " + std::to_string(xs.back()) +
                                    " lies outside the pmf domain [0, " + std::to_string(pmf.p.size()) + ")");
    for (double v : curve.p_d)
        if (!(v >= 0 && v <= 1)) throw std::invalid_argument("p_d values must lie in [0, 1]");

    ErrorReport rep;
    rep.tail = pmf.tail;
    rep.contributions.resize(pmf.p.size());
    std::size_t seg = 0;
    for (std::size_t n = 0; n < pmf.p.size(); ++n) {
        double pd;
        if (n <= xs.front()) {
            pd = curve.p_d.front();
        } else if (n >= xs.back()) {
            pd = curve.p_d.back();
        } else {
            while (xs[seg + 1] < n) ++seg;
            const double f = static_cast<double>(n - xs[seg]) / static_cast<double>(xs[seg + 1] - xs[seg]);
            pd = curve.p_d[seg] * (1 - f) + curve.p_d[seg + 1] * f;
        }
        rep.contributions[n] = pmf.p[n] * (1 - pd);
        rep.p_e += rep.contributions[n];
    }
    return rep;
}

namespace {

constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

// P(a <= N < b) for N ~ Poisson(mu).
double poisson_range(double mu, std::uint64_t a, std::uint64_t b) {
    if (b <= a) return 0.0;
    if (mu == 0) return a == 0 ? 1.0 : 0.0;
    const auto upper = static_cast<std::uint64_t>(mu + 60 * std::sqrt(mu) + 100);
    const std::uint64_t end = b == kUnbounded ? std::max(upper, a + 1) : b;
    double sum = 0;
    for (std::uint64_t n = a; n < end; ++n) sum += std::exp(poisson_log_pmf(n, mu));
    return sum;
}

}  // namespace

double ideal_error_probability(const ScenarioSignal& sig, const ThresholdSet& th) {
    if (!(sig.lambda1 >= 0) || !(sig.lambda2 >= 0)) throw std::invalid_argument("signal rates must be non-negative");
    // decision regions of the oracle along n
    struct Region {
        std::uint64_t lo, hi;
        DecisionPair d;
    };
    std::vector<Region> regions;
    const auto lower_hi = th.tau1;
    if (th.tau2_0 < lower_hi) {
        regions.push_back({0, th.tau2_0, {0, 0}});
        regions.push_back({th.tau2_0, lower_hi, {0, 1}});
    } else {
        regions.push_back({0, lower_hi, {0, 0}});
    }
    if (th.tau2_1 > th.tau1) {
        regions.push_back({th.tau1, th.tau2_1, {1, 0}});
        regions.push_back({th.tau2_1, kUnbounded, {1, 1}});
    } else {
        regions.push_back({th.tau1, kUnbounded, {1, 1}});
    }

    double bep = 0;
    for (int s1 = 0; s1 <= 1; ++s1)
        for (int s2 = 0; s2 <= 1; ++s2) {
            const double mu = s1 * sig.lambda1 + s2 * sig.lambda2;
            for (const auto& r : regions) {
                const int bits = (r.d.s1 != s1) + (r.d.s2 != s2);
                if (bits == 0) continue;
                bep += 0.25 * 0.5 * bits * poisson_range(mu, r.lo, r.hi);
            }
        }
    return bep;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> default_threshold_pairs() {
    return {{78, 386}, {77, 387}, {76, 388}, {75, 389}};
}

std::vector<double> default_kappa_am2_grid() {
    return {0.8e-3, 1.0e-3, 1.2e-3, 1.4e-3, 1.6e-3, 1.8e-3, 2.0e-3, 3.0e-3};
}

void set_parameter(ChemSICalParams& p, const std::string& name, double value) {
    auto as_count = [&] {
        if (!(value >= 0) || value != std::floor(value))
            throw std::invalid_argument(name + " must be a non-negative integer");
        return static_cast<std::uint64_t>(value);
    };
    auto v = p.rrc.values();
    for (std::size_t i = 0; i < kRrcNames.size(); ++i)
        if (name == kRrcNames[i]) {
            v[i] = value;
            p.rrc = RrcSet::from_values(v);
            return;
        }
    if (name == "tau1") p.thresholds.tau1 = as_count();
    else if (name == "tau2_0") p.thresholds.tau2_0 = as_count();
    else if (name == "tau2_1") p.thresholds.tau2_1 = as_count();
    else if (name == "stage2_pool") p.stage2_pool = as_count();
    else throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

std::vector<SweepPoint> sensitivity_sweep(const SweepSpec& spec, const ChemSICalParams& base,
                                          const EvalSettings& settings) {
    std::vector<SweepPoint> points;
    switch (spec.axis) {
        case SweepAxis::threshold_pairs: {
            if (!spec.values.empty()) throw std::invalid_argument("threshold-pair sweep takes no value grid");
            for (auto [t0, t1] : default_threshold_pairs()) {
                SweepPoint pt;
                pt.params = base;
                pt.params.thresholds.tau2_0 = t0;
                pt.params.thresholds.tau2_1 = t1;
                pt.label = std::to_string(t0) + ":" + std::to_string(t1);
                points.push_back(std::move(pt));
            }
            break;
        }
        case SweepAxis::kappa_am2:
        case SweepAxis::parameter: {
            const std::string name = spec.axis == SweepAxis::kappa_am2 ? "kappa_AM2" : spec.parameter;
            if (name.empty()) throw std::invalid_argument("sweep parameter name is empty");
            auto grid = spec.values;
            if (grid.empty() && spec.axis == SweepAxis::kappa_am2) grid = default_kappa_am2_grid();
            if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
            for (double v : grid) {
                SweepPoint pt;
                pt.params = base;
                pt.label = format_real(v);
                try {
                    set_parameter(pt.params, name, v);
                } catch (const std::invalid_argument& e) {
                    pt.error = e.what();
                }
                points.push_back(std::move(pt));
            }
            break;
        }
    }
    if (points.empty()) throw std::invalid_argument("sweep grid is empty");

    const auto pmf = input_pmf(settings.signal, settings.n_max);
    const auto inputs = input_grid(settings.n_max, settings.stride);
    for (auto& pt : points) {
        if (!pt.error.empty()) continue;
        try {
            pt.params.validate();
            pt.curve = detection_probability_curve(pt.params, inputs, settings.n_traj, settings.base_seed,
                                                   settings.ssa, settings.workers);
            auto rep = weighted_error_probability(pt.curve, pmf);
            rep.p_e_ideal = ideal_error_probability(settings.signal, pt.params.thresholds);
            pt.report = std::move(rep);
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    }
    return points;
}

namespace {

void write_header(std::ostream& os, const CsvHeader& h) {
    os << "# params: " << h.params << "\n";
    if (h.timestamp) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        os << "# generated: " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << "\n";
    }
}

}  // namespace

void write_pmf_csv(std::ostream& os, const PmfVector& pmf, const CsvHeader& header) {
    write_header(os, header);
    os << "n,p\n";
    for (std::size_t n = 0; n < pmf.p.size(); ++n) os << n << "," << format_real(pmf.p[n]) << "\n";
}

void write_pd_csv(std::ostream& os, const DetectionCurve& curve, const CsvHeader& header) {
    write_header(os, header);
    os << "n,p_d,stderr\n";
    for (std::size_t i = 0; i < curve.inputs.size(); ++i)
        os << curve.inputs[i] << "," << format_real(curve.p_d[i]) << "," << format_real(curve.stderr_[i]) << "\n";
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points, const CsvHeader& header) {
    write_header(os, header);
    os << "param,p_e\n";
    for (const auto& pt : points) {
        os << pt.label << ",";
        if (pt.report) os << format_real(pt.report->p_e);
        else os << "nan";
        os << "\n";
    }
}

void write_profile_csv(std::ostream& os, const OdeProfile& profile, const CsvHeader& header) {
    write_header(os, header);
    os << "n,c,contribution\n";
    for (std::size_t i = 0; i < profile.inputs.size(); ++i) {
        os << profile.inputs[i] << ",";
        if (profile.failed[i]) os << "nan";
        else os << profile.correct[i];
        os << "," << format_real(profile.contribution[i]) << "\n";
    }
}

}  // namespace chemsical
