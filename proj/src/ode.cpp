#include "chemsical/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace chemsical {

IntegrationError::IntegrationError(double t_reached, const std::string& what)
    : std::runtime_error(what + " (t = " + std::to_string(t_reached) + ")"), t_reached_(t_reached) {}

void OdeOptions::validate() const {
    if (!(t_end > 0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
    if (sample_count < 2) throw std::invalid_argument("sample_count must be at least 2");
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw std::invalid_argument("tolerances must be positive");
    if (!(steady_state_epsilon >= 0)) throw std::invalid_argument("steady_state_epsilon must be >= 0");
    if (!(fixed_step >= 0)) throw std::invalid_argument("fixed_step must be >= 0");
}

void mass_action_derivative(const CompiledNetwork& net, std::span<const double> x,
                            std::span<double> dxdt) {
    std::fill(dxdt.begin(), dxdt.end(), 0.0);
    for (std::size_t j = 0; j < net.reactions.size(); ++j) {
        const double v = net.rate(j, x);
        if (v == 0.0) continue;
        for (const auto& [idx, d] : net.reactions[j].delta) dxdt[idx] += static_cast<double>(d) * v;
    }
}

ContinuousState to_continuous(const DiscreteState& s) {
    ContinuousState out;
    for (const auto& [sp, v] : s.amounts()) out.set(sp, static_cast<double>(v));
    return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
public:
    explicit Stepper(const CompiledNetwork& net) : net_(net), n_(net.species.size()) {
        for (auto& k : k_) k.resize(n_);
        tmp_.resize(n_);
        y_new_.resize(n_);
        err_.resize(n_);
    }

    void derivative(std::span<const double> x, std::vector<double>& out) {
        mass_action_derivative(net_, x, out);
    }

    /// One trial step from (y, k1 = f(y)). Leaves the candidate in y_new() and
    /// f(y_new) in k7(); the embedded error estimate goes to err_.
    void attempt(const std::vector<double>& y, double h) {
        auto& [k1, k2, k3, k4, k5, k6, k7] = k_;
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * a21 * k1[i];
        derivative(tmp_, k2);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        derivative(tmp_, k3);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        derivative(tmp_, k4);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        derivative(tmp_, k5);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        derivative(tmp_, k6);
        for (std::size_t i = 0; i < n_; ++i)
            y_new_[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        derivative(y_new_, k7);
        for (std::size_t i = 0; i < n_; ++i)
            err_[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }

    double error_norm(const std::vector<double>& y, double rtol, double atol) const {
        double acc = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
            const double r = err_[i] / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(n_, 1)));
    }

    std::vector<double>& k1() { return k_[0]; }
    std::vector<double>& k7() { return k_[6]; }
    std::vector<double>& y_new() { return y_new_; }

private:
    const CompiledNetwork& net_;
    std::size_t n_;
    std::array<std::vector<double>, 7> k_;
    std::vector<double> tmp_, y_new_, err_;
};

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

Trajectory simulate_ode(const CompiledNetwork& net, std::vector<double> y, const OdeOptions& opts) {
    opts.validate();
    const std::size_t n = net.species.size();
    if (y.size() != n) throw ContractViolation("initial state does not match network species");
    for (double v : y)
        if (!(v >= 0) || !std::isfinite(v))
            throw ContractViolation("initial amounts must be finite and non-negative");

    Trajectory traj;
    traj.species = net.species;
    traj.times.push_back(0.0);
    traj.states.push_back(y);

    Stepper st(net);
    st.derivative(y, st.k1());

    const bool steady_stop = opts.steady_state_epsilon > 0;
    if (steady_stop && max_abs(st.k1()) < opts.steady_state_epsilon) {
        traj.reason = StopReason::steady_state;
        return traj;
    }

    const double t_end = opts.t_end;
    const auto grid_time = [&](std::size_t i) {
        return i + 1 == opts.sample_count
                   ? t_end
                   : t_end * static_cast<double>(i) / static_cast<double>(opts.sample_count - 1);
    };
    std::size_t next_sample = 1;

    const bool adaptive = opts.fixed_step == 0.0;
    double h = opts.fixed_step;
    if (adaptive) {
        if (opts.initial_step > 0) {
            h = opts.initial_step;
        } else {
            const double fnorm = max_abs(st.k1());
            const double ynorm = std::max(1.0, max_abs(y));
            h = fnorm > 0 ? 0.01 * ynorm / fnorm : t_end;
        }
        h = std::min(h, t_end);
    }

    double t = 0;
    bool fsal_valid = true;
    while (next_sample < opts.sample_count) {
        const double target = grid_time(next_sample);
        const bool hits_sample = t + h >= target;
        const double step = hits_sample ? target - t : h;

        if (step > 1e-15 * std::max(1.0, t)) {
            if (!hits_sample && step < 1e-12 * std::max(1.0, t))
                throw IntegrationError(t, "step size underflow");
            if (!fsal_valid) {
                st.derivative(y, st.k1());
                fsal_valid = true;
            }
            st.attempt(y, step);
            const double err = adaptive ? st.error_norm(y, opts.rel_tol, opts.abs_tol) : 0.0;

            auto& yn = st.y_new();
            bool negative = false;
            bool clamped = false;
            for (double& v : yn) {
                if (v < -opts.abs_tol) {
                    negative = true;
                } else if (v < 0) {
                    v = 0;
                    clamped = true;
                }
            }
            if (negative && !adaptive) throw IntegrationError(t, "negative amount in fixed-step mode");
            if (adaptive && (err > 1.0 || negative)) {
                h = step * (negative ? 0.5 : std::max(0.2, 0.9 * std::pow(err, -0.2)));
                continue;
            }

            std::swap(y, yn);
            if (clamped)
                fsal_valid = false;
            else
                std::swap(st.k1(), st.k7());
            ++traj.events;

            if (adaptive) {
                const double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                // a step shortened to land on the grid should not shrink the controller's step
                h = (hits_sample && step < h) ? std::max(h, step * fac) : step * fac;
            }
        }
        t = hits_sample ? target : t + step;

        if (hits_sample) {
            traj.times.push_back(t);
            traj.states.push_back(y);
            ++next_sample;
        }

        if (steady_stop && next_sample < opts.sample_count) {
            if (!fsal_valid) {
                st.derivative(y, st.k1());
                fsal_valid = true;
            }
            if (max_abs(st.k1()) < opts.steady_state_epsilon) {
                if (traj.times.back() < t) {
                    traj.times.push_back(t);
                    traj.states.push_back(y);
                }
                traj.reason = StopReason::steady_state;
                return traj;
            }
        }
    }
    traj.reason = StopReason::t_end;
    return traj;
}

Trajectory simulate_ode(const ReactionNetwork& net, const ContinuousState& init, const OdeOptions& opts) {
    auto compiled = CompiledNetwork::compile(net);
    return simulate_ode(compiled, compiled.dense(init), opts);
}

SteadyStateResult steady_state(const ReactionNetwork& net, const ContinuousState& init,
                               const OdeOptions& opts) {
    OdeOptions o = opts;
    o.sample_count = 2;
    auto traj = simulate_ode(net, init, o);
    return {traj.final_state(), traj.times.back(), traj.reason == StopReason::steady_state};
}

}  // namespace chemsical
