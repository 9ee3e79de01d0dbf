#include "parametrix/parametrix_engine.hpp"

#include <cmath>

#include "parametrix/special_kernels.hpp"

namespace parametrix {

double remainder_tail(double smoothing_constant, double horizon, double eta, int N) {
    if (!(smoothing_constant >= 0.0) || !std::isfinite(smoothing_constant)) {
        throw DomainError("smoothing constant must be finite and nonnegative");
    }
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("Hoelder exponent must lie in (0, 1]");
    if (N < 0) throw DomainError("truncation order must be nonnegative");
    if (smoothing_constant == 0.0) return 0.0;
    // log of x^n / Gamma(1 + n eta / 2) with x = C T^(eta/2) Gamma(eta/2);
    // the terms eventually decay super-geometrically, so sum until they are
    // negligible relative to the running total.
    const double log_x = std::log(smoothing_constant) + 0.5 * eta * std::log(horizon) + std::lgamma(0.5 * eta);
    double total = 0.0;
    for (int n = N + 1; n < N + 100000; ++n) {
        const double lt = n * log_x - std::lgamma(1.0 + 0.5 * n * eta);
        const double term = std::exp(lt);
        total += term;
        const double next_ratio = log_x - 0.5 * eta * std::log(1.0 + 0.5 * (n + 1) * eta);
        if (next_ratio < 0.0 && term < 1e-17 * total) break;
        if (!std::isfinite(total)) return kInf;
    }
    return total;
}

std::vector<double> log_time_grid(double t_lo, double t_hi, int points) {
    if (!(t_lo > 0.0 && t_hi >= t_lo) || points < 1) throw DomainError("invalid calibration grid");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = t_hi;
        return g;
    }
    const double r = std::log(t_hi / t_lo);
    for (int i = 0; i < points; ++i) g[i] = t_lo * std::exp(r * i / (points - 1));
    g.back() = t_hi;
    return g;
}

}  // namespace parametrix
