#include "parametrix/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include "parametrix/quadrature.hpp"
#include "parametrix/special_kernels.hpp"

namespace parametrix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// I_k(t) = integral_0^t (t - s)^(-a) I_{k-1}(s) ds with I_0(t) = t^b, written
// on the unit interval as t^(1-a) integral_0^1 (1-u)^(-a) I_{k-1}(t u) du so
// that every level sees the same scale. The endpoint singularities u^c and
// (1-u)^(-a) suit tanh-sinh; Boost passes the signed distance to the nearer
// endpoint, so 1 - u is exact near u = 1.
struct NestedValue {
    double value = 0.0;
    double rel_error = 0.0;  // own estimate plus the magnitude-weighted inner one
    long evaluations = 0;
};

NestedValue nested_beta(int k, double a, double b, double t, double rel) {
    if (k == 0) return {std::pow(t, b), 0.0, 1};
    // One rule per level: a rule may grow its abscissa tables while
    // integrating, so recursive calls must not share it.
    thread_local std::array<boost::math::quadrature::tanh_sinh<double>, 3> rules;
    auto& rule = rules[static_cast<std::size_t>(k - 1)];
    NestedValue out;
    double weight = 0.0, weighted_rel = 0.0;
    auto f = [&](double u, double uc) {
        const double gap = uc > 0.0 ? uc : 1.0 - u;
        const double left = uc < 0.0 ? -uc : u;
        // Abscissae reach ~1e-308, where t u underflows. Below 1e-200 the
        // weight times the integrand is under 1e-60.
        if (!(gap > 1e-200) || !(left > 1e-200) || !(t * left > 1e-280)) return 0.0;
        const NestedValue in = nested_beta(k - 1, a, b, t * left, 0.1 * rel);
        out.evaluations += in.evaluations;
        const double v = std::pow(gap, -a) * in.value;
        weight += std::abs(v);
        weighted_rel += std::abs(v) * in.rel_error;
        return v;
    };
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    const double unit = rule.integrate(f, 0.0, 1.0, rel, &err, &l1, &levels);
    out.value = std::pow(t, 1.0 - a) * unit;
    out.rel_error = unit != 0.0 ? err / std::abs(unit) : 0.0;
    if (weight > 0.0) out.rel_error += weighted_rel / weight;
    return out;
}

double log_h0(double ct, double y) { return -0.5 * std::log(2.0 * 3.141592653589793 * ct) - y * y / (2.0 * ct); }

}  // namespace

double beta_integral_closed_form(int n, double a, double b, double t0) {
    if (n < 1) throw DomainError("simplex dimension must be at least 1");
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("exponent a must lie in [0, 1)");
    if (!(b > -1.0)) throw DomainError("exponent b must exceed -1");
    if (!(t0 > 0.0)) throw DomainError("t0 must be positive");
    const double e = b + n * (1.0 - a);
    return std::exp(e * std::log(t0) + n * std::lgamma(1.0 - a) + std::lgamma(1.0 + b) - std::lgamma(1.0 + e));
}

BetaIntegralCheck check_beta_integral(int n, double a, double b, double t0) {
    BetaIntegralCheck r;
    r.n = n;
    r.a = a;
    r.b = b;
    r.t0 = t0;
    r.closed_form = beta_integral_closed_form(n, a, b, t0);
    if (n > 3) throw DomainError("beta integral check supports n <= 3");
    constexpr double kRel = 1e-10;
    const auto e = nested_beta(n, a, b, t0, kRel);
    if (!(e.rel_error <= 10.0 * kRel)) {
        throw AccuracyError("beta integral quadrature did not converge", e.value, e.rel_error * std::abs(e.value));
    }
    r.numeric = e.value;
    r.evaluations = e.evaluations;
    r.rel_err = std::abs(r.numeric - r.closed_form) / std::abs(r.closed_form);
    return r;
}

double passage_convolution(double t, double x, double y) {
    if (!(t > 0.0) || !(x > 0.0) || !(y > 0.0)) throw DomainError("passage convolution needs t, x, y > 0");
    auto f = [&](double s) {
        if (!(s > 0.0 && s < t)) return 0.0;
        return kernels::passage_density(s, x) * kernels::passage_density(t - s, y);
    };
    // Both factors vanish to all orders at their endpoints; the mass sits
    // near s = t x / (x + y), which is added as a breakpoint.
    const double peak = t * x / (x + y);
    const double b[] = {0.0, peak, t};
    return quad::integrate(f, std::span<const double>(b), quad::Options{1e-12, 1e-15, 400}).value;
}

PassageConvolutionCheck check_passage_convolution(const std::vector<double>& x, const std::vector<double>& y,
                                                  const std::vector<double>& t, double tol) {
    PassageConvolutionCheck r;
    r.x = x;
    r.y = y;
    r.t = t;
    for (double xi : x) {
        for (double yi : y) {
            for (double ti : t) {
                const double e = std::abs(passage_convolution(ti, xi, yi) - kernels::passage_density(ti, xi + yi));
                r.abs_err.push_back(e);
                r.max_abs_err = std::max(r.max_abs_err, e);
            }
        }
    }
    r.pass = r.max_abs_err < tol;
    return r;
}

ConstantFit fit_constants(const std::vector<double>& values,
                          const std::function<double(double, std::size_t)>& log_envelope, const ConstantBox& box) {
    // log of the smallest C for a given c, with the attaining index.
    auto needed = [&](double c, std::size_t& arg) {
        double worst = kNegInf;
        arg = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0)) continue;
            const double le = log_envelope(c, i);
            const double r = le == kNegInf ? std::numeric_limits<double>::infinity() : std::log(values[i]) - le;
            if (r > worst) {
                worst = r;
                arg = i;
            }
        }
        return worst;
    };
    auto scan = [&](double lo, double hi, int n, double& best_c, double& best) {
        for (int k = 0; k < n; ++k) {
            const double c = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
            std::size_t arg;
            const double v = needed(c, arg);
            if (v < best) {
                best = v;
                best_c = c;
            }
        }
    };
    double best_c = box.c_lo, best = std::numeric_limits<double>::infinity();
    scan(box.c_lo, box.c_hi, box.coarse, best_c, best);
    const double step = box.coarse > 1 ? (box.c_hi - box.c_lo) / (box.coarse - 1) : 0.0;
    scan(std::max(box.c_lo, best_c - step), std::min(box.c_hi, best_c + step), box.fine, best_c, best);
    ConstantFit fit;
    fit.c = best_c;
    std::size_t arg;
    const double lc = needed(best_c, arg);
    fit.C = std::max(box.C_lo, std::exp(lc));
    fit.witness = arg;
    fit.witness_value = values.empty() ? 0.0 : values[arg];
    fit.found = fit.C <= box.C_hi;
    return fit;
}

double convolution_lemma_lhs(Functional family, double t, double s, State z0, State z, double c1) {
    if (!(s > 0.0 && s < t)) throw DomainError("convolution lemma needs 0 < s < t");
    if (!(c1 > 0.0)) throw DomainError("variance scale must be positive");
    const double u = t - s;
    const double reach = 12.0 * std::sqrt(c1 * t);
    const quad::Options outer{1e-9, 1e-300, 200};
    const quad::Options inner{1e-10, 1e-300, 200};
    if (family == Functional::local_time) {
        if (z.a < z0.a) throw DomainError("local time cannot decrease");
        if (z.a == z0.a) return 0.0;
        auto fl = [&](double lp) -> quad::Estimate {
            auto fx = [&](double xp) {
                const double y1 = std::abs(z.x) + xp + z.a - lp;
                const double y2 = xp + std::abs(z0.x) + lp - z0.a;
                return std::exp(log_h0(c1 * u, y1) + log_h0(c1 * s, y2)) / std::sqrt(u * s);
            };
            auto e = quad::integrate(fx, 0.0, reach, inner);
            e.value *= 2.0;  // the integrand depends on |x'| only
            e.error *= 2.0;
            return e;
        };
        return quad::integrate(fl, z0.a, z.a, outer).value;
    }
    if (z0.x > z0.a || z.x > z.a) throw DomainError("state violates x <= m");
    if (z.a < z0.a) throw DomainError("running maximum cannot decrease");
    if (z.a == z0.a) return 0.0;
    auto fm = [&](double mp) -> quad::Estimate {
        auto fx = [&](double xp) {
            const double y1 = 2.0 * z.a - z.x - xp;
            const double y2 = 2.0 * mp - xp - z0.x;
            return std::exp(log_h0(c1 * u, y1) + log_h0(c1 * s, y2)) / std::sqrt(u * s);
        };
        return quad::integrate(fx, mp - reach, mp, inner);
    };
    return quad::integrate(fm, z0.a, z.a, outer).value;
}

ConvolutionLemmaReport check_convolution_lemma(Functional family, double t, double s,
                                               const std::vector<LemmaEndpoint>& endpoints, double c1,
                                               ConstantBox box) {
    ConvolutionLemmaReport r;
    r.family = family;
    r.t = t;
    r.s = s;
    r.c1 = c1;
    r.lhs.resize(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        r.lhs[i] = convolution_lemma_lhs(family, t, s, endpoints[i].start, endpoints[i].end, c1);
    }
    auto arg = [&](std::size_t i) {
        const State z0 = endpoints[i].start, z = endpoints[i].end;
        return family == Functional::local_time ? std::abs(z.x) + std::abs(z0.x) + z.a - z0.a
                                                : 2.0 * z.a - z.x - z0.x;
    };
    r.fit = fit_constants(
        r.lhs, [&](double c, std::size_t i) { return -0.5 * std::log(t) + log_h0(c * t, arg(i)); }, box);
    r.pass = r.fit.found;
    return r;
}

double proxy_kernel_derivative(ProxyKernel k, int r, double t, double x0, double x, double a, double m0) {
    using kernels::hermite;
    const double y1 = x - x0;
    const double y2 = k == ProxyKernel::killed ? x + x0 : 2.0 * m0 - x - x0;
    // d/dx0 of H_i(x - x0) is -H_{i+1}; d/dx0 of H_i(x + x0) is +H_{i+1};
    // d/dx0 of H_i(2 m0 - x - x0) is -H_{i+1}.
    switch (r) {
        case 0: return hermite(0, a, t, y1) - hermite(0, a, t, y2);
        case 1:
            return k == ProxyKernel::killed ? -hermite(1, a, t, y1) - hermite(1, a, t, y2)
                                            : -hermite(1, a, t, y1) + hermite(1, a, t, y2);
        case 2: return hermite(2, a, t, y1) - hermite(2, a, t, y2);
        default: throw UnsupportedOrderError("kernel derivative order must be 0, 1 or 2");
    }
}

KernelEstimateReport check_kernel_estimates(ProxyKernel kernel, double beta, double t,
                                            const std::vector<std::pair<double, double>>& points, double a,
                                            double m0, ConstantBox box) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
    if (!(t > 0.0)) throw DomainError("time must be positive");
    for (const auto& [x0, x] : points) {
        if (kernel == ProxyKernel::killed && x * x0 < 0.0) throw DomainError("killed kernel requires x * x0 >= 0");
        if (kernel == ProxyKernel::reflected && (x0 > m0 || x > m0)) {
            throw DomainError("reflected kernel requires x0, x <= m0");
        }
    }
    KernelEstimateReport rep;
    rep.kernel = kernel;
    rep.beta = beta;
    rep.t = t;
    rep.orders = kernel == ProxyKernel::killed ? std::vector<int>{0, 2} : std::vector<int>{0, 1, 2};
    rep.symmetric = true;
    for (const auto& [x0, x] : points) {
        if (proxy_kernel_derivative(kernel, 0, t, x0, x, a, m0) != proxy_kernel_derivative(kernel, 0, t, x, x0, a, m0)) {
            rep.symmetric = false;
        }
    }
    const double st = std::sqrt(t);
    auto log_min_factor = [&](double x0, double x) {
        if (beta == 0.0) return 0.0;
        const double d0 = kernel == ProxyKernel::killed ? std::abs(x0) : std::abs(m0 - x0);
        const double d1 = kernel == ProxyKernel::killed ? std::abs(x) : std::abs(m0 - x);
        const double m = std::min({d0 / st, d1 / st, 1.0});
        return m == 0.0 ? kNegInf : beta * std::log(m);
    };
    rep.pass = rep.symmetric;
    for (int r : rep.orders) {
        std::vector<double> vals(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            vals[i] = std::abs(proxy_kernel_derivative(kernel, r, t, points[i].first, points[i].second, a, m0));
        }
        auto fit = fit_constants(
            vals,
            [&](double c, std::size_t i) {
                const auto [x0, x] = points[i];
                return -0.5 * r * std::log(t) + log_min_factor(x0, x) + log_h0(c * t, x - x0);
            },
            box);
        rep.pass = rep.pass && fit.found;
        rep.fits.push_back(fit);
    }
    return rep;
}

SlopeFit fit_log_log(const std::vector<double>& t, const std::vector<double>& values) {
    SlopeFit f;
    f.t = t;
    f.values = values;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (values[i] > 0.0) {
            lx.push_back(std::log(t[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.empty()) {
        f.degenerate = true;
        return f;
    }
    if (lx.size() == 1) {
        f.intercept = ly[0];
        return f;
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        f.max_residual = std::max(f.max_residual, std::abs(ly[i] - f.intercept - f.slope * lx[i]));
    }
    return f;
}

std::vector<double> log_spaced(double lo, double hi, int points) { return log_time_grid(lo, hi, points); }

namespace {

nlohmann::ordered_json fit_json(const ConstantFit& f) {
    return {{"found", f.found}, {"C", f.C}, {"c", f.c}, {"witness_index", f.witness}, {"witness_value", f.witness_value}};
}

}  // namespace

std::string to_json(const BetaIntegralCheck& r) {
    nlohmann::ordered_json j;
    j["check"] = "beta_integral";
    j["params"] = {{"n", r.n}, {"a", r.a}, {"b", r.b}, {"t0", r.t0}};
    j["numeric"] = r.numeric;
    j["closed_form"] = r.closed_form;
    j["rel_err"] = r.rel_err;
    j["pass"] = r.rel_err < 1e-8;
    return j.dump(2);
}

std::string to_json(const PassageConvolutionCheck& r) {
    nlohmann::ordered_json j;
    j["check"] = "passage_convolution";
    j["params"] = {{"x", r.x}, {"y", r.y}, {"t", r.t}};
    j["pass"] = r.pass;
    j["max_abs_err"] = r.max_abs_err;
    j["abs_err"] = r.abs_err;
    return j.dump(2);
}

std::string to_json(const ConvolutionLemmaReport& r) {
    nlohmann::ordered_json j;
    j["check"] = "convolution_lemma";
    j["params"] = {{"family", to_string(r.family)}, {"t", r.t}, {"s", r.s}, {"c1", r.c1}};
    j["pass"] = r.pass;
    j["fitted_constants"] = fit_json(r.fit);
    j["lhs"] = r.lhs;
    return j.dump(2);
}

std::string to_json(const KernelEstimateReport& r) {
    nlohmann::ordered_json j;
    j["check"] = "kernel_estimates";
    j["params"] = {{"kernel", r.kernel == ProxyKernel::killed ? "killed" : "reflected"}, {"beta", r.beta}, {"t", r.t}};
    j["pass"] = r.pass;
    j["symmetric"] = r.symmetric;
    auto fits = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < r.fits.size(); ++k) {
        auto f = fit_json(r.fits[k]);
        f["order"] = r.orders[k];
        fits.push_back(f);
    }
    j["fitted_constants"] = fits;
    return j.dump(2);
}

std::string to_json(const SlopeFit& r, std::string_view family, State start) {
    nlohmann::ordered_json j;
    j["check"] = "smoothing_property";
    j["params"] = {{"family", family}, {"start", {start.x, start.a}}};
    j["pass"] = r.pass;
    j["degenerate"] = r.degenerate;
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    j["threshold"] = r.threshold;
    j["max_residual"] = r.max_residual;
    j["dropped_small_times"] = r.dropped;
    j["t"] = r.t;
    j["integral"] = r.values;
    return j.dump(2);
}

std::string to_json(const GaussianBoundReport& r, std::string_view family) {
    nlohmann::ordered_json j;
    j["check"] = "gaussian_upper_bounds";
    j["params"] = {{"family", family}, {"T", r.T}, {"orders", r.orders}};
    j["pass"] = r.pass;
    auto part = [](const ConstantFit& f, const std::vector<State>& pts) {
        auto o = fit_json(f);
        if (!pts.empty()) o["witness_point"] = {pts[f.witness].x, pts[f.witness].a};
        return o;
    };
    j["fitted_constants"] = {{"continuous", part(r.continuous, r.continuous_points)},
                             {"atom", part(r.atom, r.atom_points)}};
    return j.dump(2);
}

}  // namespace parametrix
