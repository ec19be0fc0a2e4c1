#include "chemsical/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace chemsical {

void ChannelParams::validate() const {
    if (!(d1 > 0 && d1 < d2)) throw std::invalid_argument("distances must satisfy 0 < d1 < d2");
    if (!(radius > 0)) throw std::invalid_argument("receiver radius must be positive");
    if (!(diffusion > 0)) throw std::invalid_argument("diffusion coefficient must be positive");
    if (!(n_tx >= 1)) throw std::invalid_argument("n_tx must be at least 1");
}

double ChannelParams::receiver_volume() const {
    return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

double expected_signal(double d, double t, const ChannelParams& cp) {
    if (!(t > 0)) throw std::domain_error("expected_signal requires t > 0");
    const double spread = 4.0 * std::numbers::pi * cp.diffusion * t;
    return cp.n_tx * cp.receiver_volume() / (spread * std::sqrt(spread)) *
           std::exp(-d * d / (4.0 * cp.diffusion * t));
}

double peak_time(double d, double diffusion) {
    if (!(d > 0) || !(diffusion > 0)) throw std::domain_error("peak_time requires d, D > 0");
    return d * d / (6.0 * diffusion);
}

ScenarioSignal scenario_signal(const ChannelParams& cp, double t_sample) {
    cp.validate();
    ScenarioSignal s;
    s.t_p = t_sample > 0 ? t_sample : peak_time(cp.d1, cp.diffusion);
    s.lambda1 = expected_signal(cp.d1, s.t_p, cp);
    s.lambda2 = expected_signal(cp.d2, s.t_p, cp);
    return s;
}

double poisson_log_pmf(std::uint64_t n, double lambda) {
    if (!(lambda >= 0)) throw std::domain_error("poisson rate must be non-negative");
    if (lambda == 0) return n == 0 ? 0.0 : -INFINITY;
    const double nd = static_cast<double>(n);
    return nd * std::log(lambda) - lambda - std::lgamma(nd + 1.0);
}

double poisson_pmf(std::uint64_t n, double lambda) { return std::exp(poisson_log_pmf(n, lambda)); }

PmfVector input_pmf(const ScenarioSignal& sig, std::size_t n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    PmfVector out;
    out.p.resize(n_max);
    const double rates[] = {0.0, sig.lambda2, sig.lambda1, sig.lambda1 + sig.lambda2};
    double sum = 0;
    for (std::size_t n = 0; n < n_max; ++n) {
        double acc = 0;
        for (double lam : rates) acc += poisson_pmf(n, lam);
        out.p[n] = 0.25 * acc;
        sum += out.p[n];
    }
    out.tail = std::max(0.0, 1.0 - sum);
    return out;
}

std::uint64_t sample_input(const ScenarioSignal& sig, int s1, int s2, RandomSeed seed) {
    if ((s1 != 0 && s1 != 1) || (s2 != 0 && s2 != 1))
        throw std::invalid_argument("symbols must be binary");
    const double mean = s1 * sig.lambda1 + s2 * sig.lambda2;
    if (mean == 0) return 0;
    StreamRng rng(seed);
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

}  // namespace chemsical
