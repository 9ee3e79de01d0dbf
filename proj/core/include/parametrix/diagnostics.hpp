#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "parametrix/errors.hpp"
#include "parametrix/mc_oracle.hpp"
#include "parametrix/parallel.hpp"
#include "parametrix/parametrix_engine.hpp"

namespace parametrix {

// Nested simplex integral of t_n^b * prod (t_j - t_{j+1})^(-a) over
// 0 < t_n < ... < t_1 < t_0, by recursive one-dimensional quadrature, next
// to its Gamma-function closed form.
struct BetaIntegralCheck {
    int n = 0;
    double a = 0.0, b = 0.0, t0 = 0.0;
    double numeric = 0.0;
    double closed_form = 0.0;
    double rel_err = 0.0;
    long evaluations = 0;
};

double beta_integral_closed_form(int n, double a, double b, double t0);
BetaIntegralCheck check_beta_integral(int n, double a, double b, double t0);

// Sum of independent passage times: the first-passage densities at
// distances x and y convolve in time to the density at distance x + y.
double passage_convolution(double t, double x, double y);

struct PassageConvolutionCheck {
    std::vector<double> x, y, t;
    std::vector<double> abs_err;  // row-major in (x, y, t)
    double max_abs_err = 0.0;
    bool pass = false;
};

PassageConvolutionCheck check_passage_convolution(const std::vector<double>& x, const std::vector<double>& y,
                                                  const std::vector<double>& t, double tol = 1e-6);

// Search for constants with value_i <= C * envelope_i(c). Envelopes are
// passed as logarithms so that far-tail points neither underflow nor divide
// by zero. For each c the smallest admissible C is max_i value_i/envelope_i
// (at least C_lo); c is chosen on a coarse grid, then refined once around
// the best coarse point.
struct ConstantBox {
    double C_lo = 1.0, C_hi = 100.0;
    double c_lo = 1.0, c_hi = 10.0;
    int coarse = 19;
    int fine = 21;
};

struct ConstantFit {
    bool found = false;
    double C = 0.0;        // smallest C at the best c (may exceed C_hi when not found)
    double c = 0.0;
    std::size_t witness = 0;  // point attaining the max ratio at the best c
    double witness_value = 0.0;
};

ConstantFit fit_constants(const std::vector<double>& values,
                          const std::function<double(double c, std::size_t i)>& log_envelope,
                          const ConstantBox& box);

// Space-time convolution of two Gaussian envelopes, against its one-step
// envelope t^(-1/2) H0(c t, .).
struct LemmaEndpoint {
    State start;
    State end;
};

struct ConvolutionLemmaReport {
    Functional family = Functional::local_time;
    double t = 0.0, s = 0.0, c1 = 1.0;
    std::vector<double> lhs;
    ConstantFit fit;
    bool pass = false;
};

double convolution_lemma_lhs(Functional family, double t, double s, State start, State end, double c1 = 1.0);
ConvolutionLemmaReport check_convolution_lemma(Functional family, double t, double s,
                                               const std::vector<LemmaEndpoint>& endpoints, double c1 = 1.0,
                                               ConstantBox box = {1.0, 50.0, 1.0, 10.0, 19, 21});

// Derivatives in the start point of the killed and reflected Gaussian
// kernels against C t^(-r/2) min(...)^beta H0(c t, x - x0).
enum class ProxyKernel { killed, reflected };

struct KernelEstimateReport {
    ProxyKernel kernel = ProxyKernel::killed;
    double beta = 0.0, t = 0.0;
    std::vector<int> orders;
    std::vector<ConstantFit> fits;  // one per order
    bool symmetric = false;         // kernel(x0, x) == kernel(x, x0) bit for bit
    bool pass = false;
};

// Order-r derivative in x0 of the kernel with variance rate a; for the
// reflected kernel the barrier is m0.
double proxy_kernel_derivative(ProxyKernel k, int r, double t, double x0, double x, double a, double m0);

KernelEstimateReport check_kernel_estimates(ProxyKernel kernel, double beta, double t,
                                            const std::vector<std::pair<double, double>>& points, double a = 1.0,
                                            double m0 = 0.0, ConstantBox box = {});

// Ordinary least squares in log-log coordinates.
struct SlopeFit {
    std::vector<double> t;
    std::vector<double> values;
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    double threshold = 0.0;
    bool degenerate = false;  // all values zero: nothing to fit
    int dropped = 0;          // smallest times dropped after quadrature failure
    bool pass = false;
};

SlopeFit fit_log_log(const std::vector<double>& t, const std::vector<double>& values);
std::vector<double> log_spaced(double lo, double hi, int points);

// Fits the smoothing integral t -> integral |kernel_t(start, .)| d(reference)
// on a log grid and compares the slope with -1 + eta/2 - slack.
template <ProxyFamily F>
SlopeFit check_smoothing_property(const F& family, State start, std::vector<double> t_grid, double slack = 0.05,
                                  int threads = 0) {
    if (t_grid.size() < 8) throw DomainError("smoothing check needs at least 8 times");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0 && t_grid[i] <= 1.0)) throw DomainError("smoothing times must lie in (0, 1]");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("smoothing times must increase");
    }
    EngineOptions opt;
    opt.threads = threads;
    Expansion<F> ex(family, start, t_grid.back(), opt);
    std::vector<double> vals(t_grid.size(), 0.0);
    std::vector<char> failed(t_grid.size(), 0);
    parallel_for(t_grid.size(), ex.threads(), [&](std::size_t i) {
        try {
            vals[i] = ex.smoothing_integral(t_grid[i], start);
        } catch (const AccuracyError&) {
            failed[i] = 1;
        }
    });
    std::size_t first = 0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (failed[i]) first = i + 1;
    }
    std::vector<double> t(t_grid.begin() + first, t_grid.end()), v(vals.begin() + first, vals.end());
    SlopeFit fit = fit_log_log(t, v);
    fit.dropped = static_cast<int>(first);
    fit.threshold = -1.0 + 0.5 * family.eta() - slack;
    fit.pass = fit.degenerate || (fit.t.size() >= 2 && fit.slope >= fit.threshold);
    return fit;
}

// Truncated series against the Gaussian envelopes of the continuous and
// atom parts of the density on an endpoint grid.
struct GaussianBoundReport {
    double T = 0.0;
    int orders = 0;
    std::vector<State> continuous_points;
    std::vector<double> continuous_values;
    std::vector<State> atom_points;
    std::vector<double> atom_values;
    ConstantFit continuous;
    ConstantFit atom;
    bool pass = false;
};

struct BoundGrid {
    int nx = 21;
    int nlevel = 21;
    double span = 4.0;  // in units of sqrt(a_sup T)
    // Deliberate corruption for checking the checker: values are multiplied
    // by corruption^(r / sqrt(T)), r the envelope argument. 1 leaves them
    // untouched.
    double corruption = 1.0;
};

template <ProxyFamily F>
GaussianBoundReport check_gaussian_upper_bounds(Expansion<F>& ex, int N, const BoundGrid& g = {},
                                                ConstantBox box = {}) {
    const State z0 = ex.start();
    const double T = ex.horizon();
    const double rho = std::sqrt(ex.family().field().a_sup() * T);
    const bool max_family = std::string_view(F::kName) == "max";
    GaussianBoundReport rep;
    rep.T = T;
    rep.orders = N;
    // Continuous part: levels strictly above the start value.
    const double x_lo = z0.x - g.span * rho;
    const double x_hi = (max_family ? z0.a : z0.x) + g.span * rho;
    for (int j = 1; j <= g.nlevel; ++j) {
        const double level = z0.a + g.span * rho * j / g.nlevel;
        for (int i = 0; i < g.nx; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / (g.nx - 1);
            if (max_family && x > level) continue;
            rep.continuous_points.push_back({x, level});
        }
    }
    // Atom part: positions on the admissible side of the barrier.
    for (int i = 0; i < g.nx; ++i) {
        double x;
        if (max_family) {
            x = z0.a - (z0.a - x_lo) * i / (g.nx - 1);
        } else {
            const double sgn = z0.x >= 0.0 ? 1.0 : -1.0;
            x = sgn * (std::abs(z0.x) + g.span * rho) * i / (g.nx - 1);
        }
        rep.atom_points.push_back({x, z0.a});
    }
    auto cont_arg = [&](State z) { return max_family ? 2.0 * z.a - z.x - z0.x : std::abs(z.x) + std::abs(z0.x) + z.a - z0.a; };
    auto atom_arg = [&](State z) { return z.x - z0.x; };

    ex.prepare_pointwise(N);
    std::vector<State> all = rep.continuous_points;
    all.insert(all.end(), rep.atom_points.begin(), rep.atom_points.end());
    std::vector<double> vals(all.size());
    parallel_for(all.size(), ex.threads(), [&](std::size_t i) {
        double total = 0.0;
        for (int n = 0; n <= N; ++n) total += ex.term(n, T, all[i]).value;
        vals[i] = total;
    });
    const std::size_t nc = rep.continuous_points.size();
    for (std::size_t i = 0; i < all.size(); ++i) {
        const double r = i < nc ? cont_arg(all[i]) : atom_arg(all[i]);
        if (g.corruption != 1.0) vals[i] *= std::pow(g.corruption, std::abs(r) / std::sqrt(T));
    }
    rep.continuous_values.assign(vals.begin(), vals.begin() + nc);
    rep.atom_values.assign(vals.begin() + nc, vals.end());

    const double log2pi = std::log(2.0 * 3.141592653589793);
    auto log_h0 = [&](double c, double y) { return -0.5 * (log2pi + std::log(c * T)) - y * y / (2.0 * c * T); };
    rep.continuous = fit_constants(
        rep.continuous_values,
        [&](double c, std::size_t i) { return -0.5 * std::log(T) + log_h0(c, cont_arg(rep.continuous_points[i])); },
        box);
    rep.atom = fit_constants(
        rep.atom_values, [&](double c, std::size_t i) { return log_h0(c, atom_arg(rep.atom_points[i])); }, box);
    rep.pass = rep.continuous.found && rep.atom.found;
    return rep;
}

std::string to_json(const BetaIntegralCheck& r);
std::string to_json(const PassageConvolutionCheck& r);
std::string to_json(const ConvolutionLemmaReport& r);
std::string to_json(const KernelEstimateReport& r);
std::string to_json(const SlopeFit& r, std::string_view family, State start);
std::string to_json(const GaussianBoundReport& r, std::string_view family);

}  // namespace parametrix
