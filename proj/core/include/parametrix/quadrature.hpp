#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

namespace parametrix::quad {

struct Options {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    int max_panels = 400;
};

// Value with an error estimate. Integrands may return either a plain double
// or an Estimate; in the latter case inner error estimates are integrated
// alongside the values, so nested integrals report a total error.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = true;

    Estimate& operator+=(const Estimate& o) {
        value += o.value;
        error += o.error;
        evaluations += o.evaluations;
        converged = converged && o.converged;
        return *this;
    }
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class R>
inline Estimate to_estimate(const R& r) {
    if constexpr (std::is_same_v<std::decay_t<R>, Estimate>) {
        return r;
    } else {
        return Estimate{static_cast<double>(r), 0.0, 1, true};
    }
}

struct Panel {
    double a, b;
    double value, error;
};

// One G7/K15 panel with the QUADPACK error heuristic.
template <class F>
Panel gk15(F& f, double a, double b, Estimate& acc) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, 15> fv{};
    std::array<double, 15> ev{};
    {
        const Estimate e = to_estimate(f(c));
        fv[7] = e.value;
        ev[7] = e.error;
        acc.evaluations += e.evaluations;
        acc.converged = acc.converged && e.converged;
    }
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const Estimate lo = to_estimate(f(c - dx));
        const Estimate hi = to_estimate(f(c + dx));
        fv[j] = lo.value;
        fv[14 - j] = hi.value;
        ev[j] = lo.error;
        ev[14 - j] = hi.error;
        acc.evaluations += lo.evaluations + hi.evaluations;
        acc.converged = acc.converged && lo.converged && hi.converged;
    }
    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    double resabs = std::abs(resk);
    double inner = kWgk[7] * ev[7];
    for (int j = 0; j < 7; ++j) {
        const double s = fv[j] + fv[14 - j];
        resk += kWgk[j] * s;
        resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
        inner += kWgk[j] * (ev[j] + ev[14 - j]);
        if (j % 2 == 1) resg += kWg[j / 2] * s;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
    const double ah = std::abs(h);
    resk *= h;
    resabs *= ah;
    resasc *= ah;
    double err = std::abs((resk - resg * h));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return Panel{a, b, resk, err + ah * inner};
}

}  // namespace detail

// Adaptive integration over [breaks.front(), breaks.back()], starting with
// one panel per consecutive pair of breakpoints and bisecting the panel with
// the largest error until the total error meets the tolerance.
template <class F>
Estimate integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
    Estimate acc;
    if (breaks.size() < 2) return acc;
    std::vector<detail::Panel> panels;
    panels.reserve(static_cast<std::size_t>(std::max<int>(opt.max_panels, 1) + 1));
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) panels.push_back(detail::gk15(f, breaks[i], breaks[i + 1], acc));
    }
    auto totals = [&] {
        double v = 0.0, e = 0.0;
        for (const auto& p : panels) {
            v += p.value;
            e += p.error;
        }
        return std::pair{v, e};
    };
    auto [value, error] = totals();
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
        if (static_cast<int>(panels.size()) >= opt.max_panels) {
            acc.converged = false;
            break;
        }
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const auto& l, const auto& r) { return l.error < r.error; });
        const double a = worst->a, b = worst->b, m = 0.5 * (a + b);
        if (!(m > a && m < b)) {  // interval no longer splittable in floating point
            acc.converged = false;
            break;
        }
        *worst = detail::gk15(f, a, m, acc);
        panels.push_back(detail::gk15(f, m, b, acc));
        std::tie(value, error) = totals();
    }
    acc.value = value;
    acc.error = error;
    return acc;
}

template <class F>
Estimate integrate(F&& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> br{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(br), opt);
}

// Sorted, deduplicated breakpoints restricted to [lo, hi], endpoints included.
std::vector<double> make_breaks(double lo, double hi, std::initializer_list<double> interior);

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

// Barycentric weights for Lagrange interpolation through `nodes`.
std::vector<double> barycentric_weights(std::span<const double> nodes);

// Lagrange basis values at x (sums to one); exact node hits give a unit vector.
void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x, std::span<double> out);

}  // namespace parametrix::quad
