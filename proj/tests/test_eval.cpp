#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chemsical/eval.hpp"

using namespace chemsical;

namespace {

// explicit decision tree: compare with tau1, then with the threshold on the chosen branch
DecisionPair tree_walk(std::uint64_t n, const ThresholdSet& th) {
    struct Node {
        std::uint64_t threshold;
        int below, above;  // child index, or -1 - leaf bits
    };
    const Node nodes[] = {
        {th.tau1, 1, 2},
        {th.tau2_0, -1 - 0b00, -1 - 0b01},
        {th.tau2_1, -1 - 0b10, -1 - 0b11},
    };
    int at = 0;
    for (;;) {
        const int next = n < nodes[at].threshold ? nodes[at].below : nodes[at].above;
        if (next < 0) {
            const int bits = -1 - next;
            return {bits >> 1, bits & 1};
        }
        at = next;
    }
}

double poisson_sum(double lam, std::uint64_t lo, std::uint64_t hi) {
    double s = 0;
    for (std::uint64_t n = lo; n < hi; ++n) s += poisson_pmf(n, lam);
    return s;
}

}  // namespace

TEST_CASE("sic oracle") {
    const ThresholdSet th;
    CHECK(sic_oracle(300, th) == DecisionPair{1, 0});
    CHECK(sic_oracle(0, th) == DecisionPair{0, 0});
    CHECK(sic_oracle(77, th) == DecisionPair{0, 0});
    CHECK(sic_oracle(78, th) == DecisionPair{0, 1});
    CHECK(sic_oracle(230, th) == DecisionPair{0, 1});
    CHECK(sic_oracle(231, th) == DecisionPair{1, 0});
    CHECK(sic_oracle(385, th) == DecisionPair{1, 0});
    CHECK(sic_oracle(386, th) == DecisionPair{1, 1});
    for (const ThresholdSet t : {ThresholdSet{}, ThresholdSet{231, 76, 388}, ThresholdSet{0, 0, 0}})
        for (std::uint64_t n = 0; n < 600; ++n) CHECK(sic_oracle(n, t) == tree_walk(n, t));
    CHECK(SicOracle{th}(400) == DecisionPair{1, 1});
}

TEST_CASE("correct detection") {
    CHECK(correct_detection({1, 0}, {1, 0}) == 1);
    CHECK(correct_detection({1, 1}, {1, 0}) == 0);
    CHECK(correct_detection({0, 0}, {1, 0}) == 0);
}

TEST_CASE("input grid") {
    CHECK(input_grid(10, 4) == std::vector<std::uint64_t>{0, 4, 8});
    CHECK(input_grid(3, 1) == std::vector<std::uint64_t>{0, 1, 2});
    CHECK_THROWS(input_grid(10, 0));
}

TEST_CASE("wilson stderr") {
    CHECK(wilson_stderr(0, 0) == 0);
    CHECK(wilson_stderr(50, 100) == doctest::Approx(std::sqrt(25.25) / 101));
    CHECK(wilson_stderr(100, 100) > 0);
}

TEST_CASE("weighted error probability") {
    const auto pmf = input_pmf(scenario_signal({}), 600);
    double mass = 0;
    for (double p : pmf.p) mass += p;

    DetectionCurve c;
    c.inputs = input_grid(600, 4);
    c.p_d.assign(c.inputs.size(), 1.0);
    CHECK(weighted_error_probability(c, pmf).p_e == 0);
    c.p_d.assign(c.inputs.size(), 0.5);
    CHECK(weighted_error_probability(c, pmf).p_e == doctest::Approx(0.5 * mass));

    // interpolation: linear p_d reproduces the exact sum
    c.inputs = {0, 100, 599};
    c.p_d = {1.0, 0.0, 1.0};
    double expect = 0;
    for (std::size_t n = 0; n < 600; ++n) {
        const double pd = n <= 100 ? 1 - n / 100.0 : (n - 100) / 499.0;
        expect += pmf.p[n] * (1 - pd);
    }
    const auto rep = weighted_error_probability(c, pmf);
    CHECK(rep.p_e == doctest::Approx(expect).epsilon(1e-12));
    CHECK(rep.contributions.size() == 600);
    CHECK(rep.tail == pmf.tail);

    c.inputs = {0, 700};
    c.p_d = {1, 1};
    CHECK_THROWS(weighted_error_probability(c, pmf));
    c.inputs = {0, 10};
    c.p_d = {1};
    CHECK_THROWS(weighted_error_probability(c, pmf));
}

TEST_CASE("ideal error probability") {
    const auto sig = scenario_signal({});
    const ThresholdSet th;
    const auto value = ideal_error_probability(sig, th);
    // direct summation over the decision regions
    const double lam[4] = {0, sig.lambda2, sig.lambda1, sig.lambda1 + sig.lambda2};
    double total = 0;
    for (int h = 0; h < 4; ++h) {
        const int s1 = h >> 1, s2 = h & 1;
        for (std::uint64_t n = 0; n < 3000; ++n) {
            const auto d = sic_oracle(n, th);
            const double w = lam[h] == 0 ? (n == 0 ? 1.0 : 0.0) : poisson_pmf(n, lam[h]);
            total += w * ((d.s1 != s1) + (d.s2 != s2)) / 2.0;
        }
    }
    CHECK(value == doctest::Approx(total / 4).epsilon(1e-6));
    CHECK(value > 1e-7);
    CHECK(value < 1e-4);

    CHECK(ideal_error_probability(sig, {0, 0, 0}) >= 0.25);
    CHECK(poisson_sum(sig.lambda1, 0, 231) < 1e-3);
}

TEST_CASE("detection curve basics") {
    ChemSICalParams p;
    SsaOptions o;
    o.t_end = 40;
    const auto c1 = detection_probability_curve(p, {0, 500}, 20, 3, o, 1);
    const auto c2 = detection_probability_curve(p, {0, 500}, 20, 3, o, 3);
    CHECK(c1 == c2);
    CHECK(c1.p_d[0] == 1.0);
    CHECK(c1.p_d[1] >= 0.9);
    CHECK(c1.n_traj == 20);
    // a single input keeps its values when the grid changes
    const auto c3 = detection_probability_curve(p, {500}, 20, 3, o, 1);
    CHECK(c3.p_d[0] == c1.p_d[1]);
    CHECK_THROWS(detection_probability_curve(p, {5, 1}, 20, 3, o, 1));
    CHECK_THROWS(detection_probability_curve(p, {1}, 0, 3, o, 1));
}

TEST_CASE("ode error profile") {
    ChemSICalParams p;
    OdeOptions o;
    o.t_end = 40;
    const auto pmf = input_pmf(scenario_signal({}), 600);
    const auto prof = ode_error_profile(p, {0, 100, 300, 450}, pmf, o, 2);
    CHECK(prof.correct == std::vector<int>{1, 1, 1, 1});
    CHECK(prof.weighted_error == 0);
}

TEST_CASE("parameters and sweep grids") {
    ChemSICalParams p;
    set_parameter(p, "kappa_AM2", 0.0016);
    CHECK(p.rrc.kappa_AM2 == 0.0016);
    set_parameter(p, "tau2_0", 76);
    CHECK(p.thresholds.tau2_0 == 76);
    set_parameter(p, "stage2_pool", 170);
    CHECK(p.stage2_pool == 170);
    CHECK_THROWS(set_parameter(p, "bogus", 1));
    CHECK_THROWS(set_parameter(p, "tau1", -1));
    CHECK(default_threshold_pairs().front() == std::pair<std::uint64_t, std::uint64_t>{78, 386});
    CHECK(std::find(default_threshold_pairs().begin(), default_threshold_pairs().end(),
                    std::pair<std::uint64_t, std::uint64_t>{76, 388}) != default_threshold_pairs().end());
    const auto g = default_kappa_am2_grid();
    CHECK(std::find(g.begin(), g.end(), 1.6e-3) != g.end());
    CHECK(std::find(g.begin(), g.end(), 3e-3) != g.end());
}

TEST_CASE("sweep records failed points and continues") {
    ChemSICalParams p;
    EvalSettings s;
    s.signal = scenario_signal({});
    s.n_max = 600;
    s.stride = 300;
    s.n_traj = 2;
    s.ssa.t_end = 1;
    SweepSpec spec;
    spec.axis = SweepAxis::parameter;
    spec.parameter = "tau1";
    spec.values = {500, 231};
    const auto pts = sensitivity_sweep(spec, p, s);
    REQUIRE(pts.size() == 2);
    CHECK_FALSE(pts[0].report.has_value());
    CHECK_FALSE(pts[0].error.empty());
    CHECK(pts[1].report.has_value());

    std::ostringstream os;
    write_sweep_csv(os, pts, {"test", false});
    const auto text = os.str();
    CHECK(text.rfind("# params: test\n", 0) == 0);
    CHECK(text.find("nan") != std::string::npos);
    CHECK(text.find("# generated") == std::string::npos);
}

TEST_CASE("csv writers") {
    PmfVector pmf;
    pmf.p = {0.5, 0.25};
    std::ostringstream os;
    write_pmf_csv(os, pmf, {"x=1", true});
    CHECK(os.str().find("# generated: ") != std::string::npos);
    CHECK(os.str().find("n,p\n0,0.5\n1,0.25\n") != std::string::npos);

    DetectionCurve c;
    c.inputs = {0};
    c.p_d = {1};
    c.stderr_ = {0.1};
    c.truncated = {0};
    std::ostringstream pd;
    write_pd_csv(pd, c, {"", false});
    CHECK(pd.str().find("n,p_d,stderr\n0,1.0,0.1\n") != std::string::npos);
}
