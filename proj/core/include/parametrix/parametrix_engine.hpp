#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parametrix/coefficient_field.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/measure.hpp"
#include "parametrix/parallel.hpp"
#include "parametrix/quadrature.hpp"
#include "parametrix/term_table.hpp"

namespace parametrix {

// What the series engine needs from a proxy family. Both built-in families
// satisfy it; any other family with the same surface runs through the same
// code.
template <class F>
concept ProxyFamily = requires(const F& f, double t, State z, const ConvolutionQuery& q, QuadPieces& pieces,
                               const QuadPiece& piece, Breaks& breaks, double& d) {
    { F::kName } -> std::convertible_to<std::string_view>;
    { f.field() } -> std::convertible_to<const CoefficientField&>;
    { f.eta() } -> std::convertible_to<double>;
    { f.hat_density(t, z, z) } -> std::convertible_to<double>;
    { f.kernel(t, z, z) } -> std::convertible_to<double>;
    { f.on_atom(z, z) } -> std::convertible_to<bool>;
    { f.radius(t) } -> std::convertible_to<double>;
    { f.kernel_vanishes() } -> std::convertible_to<bool>;
    { f.series_admissible() } -> std::convertible_to<bool>;
    f.check_state(z);
    f.check_pair(z, z);
    f.reference_pieces(z, t, pieces);
    f.convolution_pieces(q, pieces);
    f.strip_x_breaks(q, piece, t, breaks);
    { f.chart() } -> std::convertible_to<const ChartLayout&>;
    { f.has_atom(z) } -> std::convertible_to<bool>;
    { f.chart_point(z, t, t, t) } -> std::same_as<State>;
    f.chart_coords(z, t, z, d, d);
    f.chart_level_breaks(z, t, breaks);
    f.chart_x_breaks(z, t, t, breaks);
    { f.atom_x(z, t, t) } -> std::convertible_to<double>;
    { f.atom_coord(z, t, t, d) } -> std::convertible_to<double>;
    { f.envelope_distance(z, z) } -> std::convertible_to<double>;
};

struct EngineOptions {
    // Pointwise terms: relative tolerance of the outer time integral and an
    // absolute floor expressed in units of the proxy density scale.
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    int max_panels = 200;
    int inner_max_panels = 100;
    // Tabulated intermediate orders.
    double table_rel_tol = 1e-5;
    // Orders >= 2 integrate against an interpolated table whose own error
    // is larger than this, both pointwise and when tabulated.
    double sourced_rel_tol = 1e-4;
    int table_panel_nodes = 6;
    int table_time_nodes = 12;
    // Chart nodes beyond this many proxy scales from the start are zero.
    double table_skip_radius = 9.0;
    // Reference-measure integrals of terms (masses, CDFs).
    double measure_rel_tol = 1e-9;
    double measure_abs_tol = 1e-12;
    int n_max = 3;
    int threads = 0;
    int calibration_points = 12;
    double calibration_span = 1e-3;  // smallest calibration time relative to the horizon
    // With a vanishing kernel every correction is exactly zero; skip the
    // quadrature. Tests switch this off to exercise the integration path.
    bool skip_vanishing_kernel = true;
};

// Subset of the reference measure: part filter plus a box in (x, a).
struct Region {
    enum class Parts { all, atom, continuous };
    Parts parts = Parts::all;
    double x_lo = -kInf;
    double x_hi = kInf;
    double level_lo = -kInf;
    double level_hi = kInf;
};

struct SeriesEvaluation {
    Part part = Part::Continuous;
    std::vector<double> terms;
    std::vector<double> term_errors;
    double remainder_bound = 0.0;
    double total = 0.0;
    double quadrature_error = 0.0;
    int orders_used = 0;
    bool negative = false;  // total < 0, allowed from truncation but flagged
};

class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, SeriesEvaluation partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const SeriesEvaluation& partial() const noexcept { return partial_; }

private:
    SeriesEvaluation partial_;
};

// Tail sum over n > N of C^n T^(n eta/2) Gamma(eta/2)^n / Gamma(1 + n eta/2).
double remainder_tail(double smoothing_constant, double horizon, double eta, int N);

// Smoothing integral of a kernel at time t from a fixed start, and the
// time grid used to calibrate the smoothing constant.
std::vector<double> log_time_grid(double t_lo, double t_hi, int points);

// The parametrix series for one family, start state and horizon. Terms of
// order >= 2 integrate against a tabulated representation of the previous
// order, built lazily and shared by every query at this start and horizon.
template <ProxyFamily F>
class Expansion {
public:
    Expansion(F family, State start, double horizon, EngineOptions options = {})
        : family_(std::move(family)), start_(start), horizon_(horizon), opt_(options) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
        family_.check_state(start_);
        threads_ = resolve_threads(opt_.threads);
    }

    const F& family() const { return family_; }
    State start() const { return start_; }
    double horizon() const { return horizon_; }
    const EngineOptions& options() const { return opt_; }
    int threads() const { return threads_; }

    // Term of order n at time t <= horizon and end state z.
    quad::Estimate term(int n, double t, State z) {
        if (n < 0) throw DomainError("series order must be nonnegative");
        if (!(t > 0.0 && t <= horizon_)) throw DomainError("term time must lie in (0, horizon]");
        family_.check_pair(start_, z);
        if (n == 0) return quad::Estimate{family_.hat_density(t, start_, z), 0.0, 1, true};
        if (opt_.skip_vanishing_kernel && family_.kernel_vanishes()) return quad::Estimate{};
        if (n >= 2) ensure_table(n - 1, true);
        const double rel = n >= 2 ? std::max(opt_.rel_tol, opt_.sourced_rel_tol) : opt_.rel_tol;
        const quad::Estimate e = direct_term(n, t, z, rel);
        const double target = std::max(opt_.abs_tol * density_scale(t, family_.on_atom(start_, z)),
                                       rel * std::abs(e.value));
        if (!e.converged && e.error > 10.0 * target) {
            throw AccuracyError("series term of order " + std::to_string(n) + " did not converge", e.value, e.error);
        }
        return e;
    }

    // All orders 0..N at the horizon.
    SeriesEvaluation evaluate(State z, int orders) {
        if (orders < 0) throw DomainError("orders must be nonnegative");
        require_series();
        family_.check_pair(start_, z);
        if (orders >= 2) ensure_table(orders - 1, true);
        SeriesEvaluation ev;
        ev.part = family_.on_atom(start_, z) ? Part::Atom : Part::Continuous;
        for (int n = 0; n <= orders; ++n) {
            const auto e = term(n, horizon_, z);
            ev.terms.push_back(e.value);
            ev.term_errors.push_back(e.error);
            ev.total += e.value;
            ev.quadrature_error += e.error;
        }
        ev.orders_used = orders;
        ev.remainder_bound = remainder_bound(orders);
        ev.negative = ev.total < 0.0;
        return ev;
    }

    // Smallest N <= n_max whose remainder bound is below tol.
    SeriesEvaluation evaluate_to_tolerance(State z, double tol) {
        if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
        require_series();
        int N = 0;
        while (N < opt_.n_max && !(remainder_bound(N) < tol)) ++N;
        SeriesEvaluation ev = evaluate(z, N);
        if (!(ev.remainder_bound < tol)) {
            throw TruncationError("remainder bound " + std::to_string(ev.remainder_bound) +
                                      " not below tolerance after N_max = " + std::to_string(N) + " orders",
                                  ev);
        }
        return ev;
    }

    // Calibrated C_T: max over probes and the calibration grid of
    // t^(1 - eta/2) * integral of |kernel_t| against the reference measure.
    double smoothing_constant() {
        std::call_once(calibration_once_, [&] {
            if (family_.kernel_vanishes()) {
                smoothing_constant_ = 0.0;
                return;
            }
            const auto grid = log_time_grid(horizon_ * opt_.calibration_span, horizon_, opt_.calibration_points);
            const auto probes = calibration_probes();
            std::vector<double> vals(grid.size() * probes.size(), 0.0);
            const double eta = family_.eta();
            parallel_for(vals.size(), threads_, [&](std::size_t i) {
                const double t = grid[i % grid.size()];
                vals[i] = std::pow(t, 1.0 - 0.5 * eta) * smoothing_integral(t, probes[i / grid.size()]);
            });
            smoothing_constant_ = *std::max_element(vals.begin(), vals.end());
        });
        return smoothing_constant_;
    }

    double remainder_bound(int N) { return remainder_tail(smoothing_constant(), horizon_, family_.eta(), N); }

    // Integral of |kernel_t(z0, .)| against the reference measure at z0.
    double smoothing_integral(double t, State z0) const {
        QuadPieces pieces;
        family_.reference_pieces(z0, t, pieces);
        const double scale = 1.0 / t;
        double total = 0.0;
        for (const auto& p : pieces.span()) {
            auto f = [&](State z) { return std::abs(family_.kernel(t, z0, z)); };
            total += integrate_piece(z0, t, p, f, Region{}, 1e-7, 1e-10 * scale, false).value;
        }
        return total;
    }

    // Integral at the horizon of the order-n term over a region of the
    // reference measure.
    quad::Estimate integrate_order(int n, const Region& region) {
        if (n < 0) throw DomainError("series order must be nonnegative");
        QuadPieces pieces;
        family_.reference_pieces(start_, horizon_, pieces);
        quad::Estimate total;
        if (n == 0) {
            auto f = [&](State z) { return family_.hat_density(horizon_, start_, z); };
            for (const auto& p : pieces.span()) total += integrate_piece(start_, horizon_, p, f, region,
                                                                         opt_.measure_rel_tol, opt_.measure_abs_tol, false);
            return total;
        }
        if (opt_.skip_vanishing_kernel && family_.kernel_vanishes()) return total;
        const TermTable& tab = ensure_table(n, false);
        const TableSlice slice = tab.slice_at(horizon_);
        auto f = [&](State z) { return table_value(slice, z); };
        for (const auto& p : pieces.span()) total += integrate_piece(start_, horizon_, p, f, region,
                                                                     opt_.measure_rel_tol, opt_.measure_abs_tol, true);
        return total;
    }

    // Sum over orders 0..N of integrate_order.
    quad::Estimate integrate_series(int N, const Region& region) {
        quad::Estimate total;
        for (int n = 0; n <= N; ++n) total += integrate_order(n, region);
        return total;
    }

    // Builds the tabulated orders needed by evaluate(., N) and
    // integrate_series(N, .), so later queries can run concurrently.
    void prepare(int N) {
        if (opt_.skip_vanishing_kernel && family_.kernel_vanishes()) return;
        if (N >= 2) ensure_table(N - 1, true);
        if (N >= 1) ensure_table(N, false);
    }
    void prepare_pointwise(int N) {
        if (opt_.skip_vanishing_kernel && family_.kernel_vanishes()) return;
        if (N >= 2) ensure_table(N - 1, true);
    }

    // Value of a tabulated order at the horizon (final slice), for
    // diagnostics comparing table and direct evaluation.
    double tabulated_value(int n, double t, State z) {
        const TermTable& tab = ensure_table(n, t != horizon_);
        return table_value(tab.slice_at(t), z);
    }

    // Number of chart nodes evaluated directly so far, for reporting.
    long table_evaluations() const { return table_evaluations_; }

private:
    void require_series() const {
        if (!family_.series_admissible()) {
            throw DomainError(std::string(F::kName) +
                              " series requires a driftless field and kernel (drift must be identically 0)");
        }
    }

    double density_scale(double t, bool atom) const {
        const double v = family_.field().a_sup() * t;
        return atom ? 1.0 / std::sqrt(v) : 1.0 / v;
    }

    std::vector<State> calibration_probes() const {
        const double rho = std::sqrt(family_.field().a_sup() * horizon_);
        std::vector<State> cand = {start_,
                                   {start_.x + rho, start_.a},
                                   {start_.x - rho, start_.a},
                                   {start_.x, start_.a + rho},
                                   {start_.x - rho, start_.a + rho}};
        std::vector<State> out;
        for (const auto& z : cand) {
            try {
                family_.check_state(z);
                out.push_back(z);
            } catch (const DomainError&) {
            }
        }
        return out;
    }

    static quad::Estimate scaled(quad::Estimate e, double f) {
        e.value *= f;
        e.error *= std::abs(f);
        return e;
    }

    double table_value(const TableSlice& sl, State zp) const {
        const double rho = sl.rho();
        if (zp.a == start_.a) {
            double weight;
            const double v = family_.atom_coord(start_, rho, zp.x, weight);
            return weight == 0.0 ? 0.0 : weight * sl.atom(v) / rho;
        }
        double u1, u2;
        family_.chart_coords(start_, rho, zp, u1, u2);
        return sl.continuous(u1, u2) / (rho * rho);
    }

    // Spatial convolution of a source density at time q.s with the kernel
    // over the remaining gap, summed over the pieces of the decomposition.
    // A tabulated source (src_rho > 0) is piecewise polynomial on its chart
    // panels, so the panel edges at scale src_rho become breakpoints.
    template <class Src>
    quad::Estimate convolve(const ConvolutionQuery& q, const Src& src, double rel, double abs,
                            double src_rho = 0.0) const {
        QuadPieces pieces;
        family_.convolution_pieces(q, pieces);
        quad::Estimate total;
        const quad::Options o{rel, abs, opt_.inner_max_panels};
        for (const auto& p : pieces.span()) {
            if (!p.strip) {
                const double level = p.level;
                auto fx = [&](double x) {
                    const State zp{x, level};
                    return src(zp) * family_.kernel(q.gap, zp, q.z);
                };
                if (src_rho > 0.0) {
                    Breaks b;
                    const auto xs = p.x_breaks.span();
                    for (double x : xs) b.add(x);
                    if (level == q.z0.a) {
                        for (double v : family_.chart().atom_breaks) b.add(family_.atom_x(q.z0, src_rho, v));
                    } else {
                        family_.chart_x_breaks(q.z0, src_rho, level, b);
                    }
                    if (!b.finish(xs.front(), xs.back())) continue;
                    total += quad::integrate(fx, b.span(), o);
                    continue;
                }
                total += quad::integrate(fx, p.x_breaks.span(), o);
                continue;
            }
            Breaks lbk;
            for (double v : p.level_breaks.span()) lbk.add(v);
            if (src_rho > 0.0) {
                const auto ls = p.level_breaks.span();
                family_.chart_level_breaks(q.z0, src_rho, lbk);
                if (!lbk.finish(ls.front(), ls.back())) continue;
            }
            const auto lb = lbk.span();
            const double width = lb.back() - lb.front();
            const quad::Options oi{rel, abs / width, opt_.inner_max_panels};
            auto fl = [&](double level) -> quad::Estimate {
                Breaks xb;
                family_.strip_x_breaks(q, p, level, xb);
                if (xb.n < 2) return {};
                if (src_rho > 0.0) {
                    const double lo = xb.v[0], hi = xb.v[xb.n - 1];
                    family_.chart_x_breaks(q.z0, src_rho, level, xb);
                    if (!xb.finish(lo, hi)) return {};
                }
                auto fx = [&](double x) {
                    const State zp{x, level};
                    return src(zp) * family_.kernel(q.gap, zp, q.z);
                };
                return quad::integrate(fx, xb.span(), oi);
            };
            total += quad::integrate(fl, lb, o);
        }
        return total;
    }

    // Order-n term by one time integral of spatial convolutions; the source
    // is the hat density for n = 1 and the tabulated order n-1 otherwise.
    // The time axis is split at t/2: s = (t/2) w^2 below and
    // gap = (t/2) v^(2/eta) above, which removes the gap^(-1+eta/2)
    // singularity of the kernel.
    quad::Estimate direct_term(int n, double t, State z, double rel) const {
        const bool atom = family_.on_atom(start_, z);
        const double abs_target = opt_.abs_tol * density_scale(t, atom);
        const double inner_rel = 0.1 * rel;
        const double inner_abs = abs_target / t;
        const TermTable* src = n >= 2 ? tables_[n - 1].get() : nullptr;
        auto G = [&](double s) -> quad::Estimate {
            const ConvolutionQuery q{start_, z, s, t - s};
            if (src) {
                const TableSlice sl = src->slice_at(s);
                auto f = [&](State zp) { return table_value(sl, zp); };
                return convolve(q, f, inner_rel, inner_abs, sl.rho());
            }
            auto f = [&](State zp) { return family_.hat_density(s, start_, zp); };
            return convolve(q, f, inner_rel, inner_abs);
        };
        const double p = 2.0 / family_.eta();
        const quad::Options o{rel, 0.5 * abs_target, opt_.max_panels};
        auto lower = quad::integrate(
            [&](double w) -> quad::Estimate {
                const double s = 0.5 * t * w * w;
                if (!(s > 0.0)) return {};
                return scaled(G(s), t * w);
            },
            0.0, 1.0, o);
        const auto upper = quad::integrate(
            [&](double v) -> quad::Estimate {
                const double gap = 0.5 * t * std::pow(v, p);
                if (!(gap > 0.0)) return {};
                return scaled(G(t - gap), 0.5 * t * p * std::pow(v, p - 1.0));
            },
            0.0, 1.0, o);
        lower += upper;
        return lower;
    }

    // Table of order k >= 1. `full` fills every time node; otherwise only
    // the horizon slice is needed.
    const TermTable& ensure_table(int k, bool full) {
        std::lock_guard lock(table_mutex_);
        return ensure_table_locked(k, full);
    }

    const TermTable& ensure_table_locked(int k, bool full) {
        if (k >= 2) ensure_table_locked(k - 1, true);
        if (static_cast<int>(tables_.size()) <= k) tables_.resize(k + 1);
        if (!tables_[k]) {
            tables_[k] = std::make_unique<TermTable>(family_.chart(), opt_.table_panel_nodes, opt_.table_time_nodes,
                                                     horizon_, family_.eta(), family_.field().a_sup(),
                                                     family_.has_atom(start_));
        }
        TermTable& tab = *tables_[k];
        std::vector<int> times;
        for (int j = full ? 1 : tab.time_count() - 1; j < tab.time_count(); ++j) {
            if (!tab.filled(j)) times.push_back(j);
        }
        if (times.empty()) return tab;
        const std::size_t per = tab.slice_size();
        const std::size_t n2 = tab.u2().size();
        std::vector<double> out(times.size() * per, 0.0);
        std::vector<char> done(out.size(), 0);
        parallel_for(out.size(), threads_, [&](std::size_t idx) {
            const int j = times[idx / per];
            const std::size_t i = idx % per;
            const double s = tab.time(j);
            const double rho = tab.rho(j);
            State z;
            double weight;
            if (i < tab.continuous_size()) {
                z = family_.chart_point(start_, rho, tab.u1().nodes()[i / n2], tab.u2().nodes()[i % n2]);
                weight = rho * rho;
            } else {
                z = State{family_.atom_x(start_, rho, tab.v().nodes()[i - tab.continuous_size()]), start_.a};
                weight = rho;
            }
            if (family_.envelope_distance(start_, z) > opt_.table_skip_radius * rho) return;
            const double rel = k >= 2 ? std::max(opt_.table_rel_tol, opt_.sourced_rel_tol) : opt_.table_rel_tol;
            out[idx] = weight * direct_term(k, s, z, rel).value;
            done[idx] = 1;
        });
        for (std::size_t idx = 0; idx < out.size(); ++idx) {
            tab.values(times[idx / per])[idx % per] = out[idx];
            table_evaluations_ += done[idx];
        }
        for (int j : times) tab.mark_filled(j);
        return tab;
    }

    // Integral of f over one reference piece restricted to a region. For
    // tabulated integrands the chart panel edges are added as breakpoints.
    template <class Fn>
    quad::Estimate integrate_piece(State z0, double t, const QuadPiece& p, const Fn& f, const Region& r, double rel,
                                   double abs, bool chart_breaks) const {
        const double rho = std::sqrt(family_.field().a_sup() * t);
        if (!p.strip) {
            if (r.parts == Region::Parts::continuous) return {};
            if (p.level < r.level_lo || p.level > r.level_hi) return {};
            Breaks b;
            const auto xs = p.x_breaks.span();
            for (double x : xs) b.add(x);
            if (chart_breaks) {
                for (double v : family_.chart().atom_breaks) b.add(family_.atom_x(z0, rho, v));
            }
            if (!b.finish(std::max(xs.front(), r.x_lo), std::min(xs.back(), r.x_hi))) return {};
            auto fx = [&](double x) { return f(State{x, p.level}); };
            return quad::integrate(fx, b.span(), quad::Options{rel, abs, opt_.max_panels});
        }
        if (r.parts == Region::Parts::atom) return {};
        Breaks lb;
        const auto ls = p.level_breaks.span();
        for (double v : ls) lb.add(v);
        if (chart_breaks) family_.chart_level_breaks(z0, rho, lb);
        if (!lb.finish(std::max(ls.front(), r.level_lo), std::min(ls.back(), r.level_hi))) return {};
        const ConvolutionQuery q{z0, z0, t, 0.0};
        const double width = lb.v[lb.n - 1] - lb.v[0];
        auto fl = [&](double level) -> quad::Estimate {
            Breaks xb;
            family_.strip_x_breaks(q, p, level, xb);
            if (xb.n < 2) return {};
            const double lo = std::max(xb.v[0], r.x_lo), hi = std::min(xb.v[xb.n - 1], r.x_hi);
            if (chart_breaks) family_.chart_x_breaks(z0, rho, level, xb);
            if (!xb.finish(lo, hi)) return {};
            auto fx = [&](double x) { return f(State{x, level}); };
            return quad::integrate(fx, xb.span(), quad::Options{rel, abs / width, opt_.max_panels});
        };
        return quad::integrate(fl, lb.span(), quad::Options{rel, abs, opt_.max_panels});
    }

    F family_;
    State start_;
    double horizon_;
    EngineOptions opt_;
    int threads_ = 1;
    std::mutex table_mutex_;
    std::vector<std::unique_ptr<TermTable>> tables_;
    long table_evaluations_ = 0;
    std::once_flag calibration_once_;
    double smoothing_constant_ = 0.0;
};

// Free-function surface over a one-shot expansion.
template <ProxyFamily F>
double series_term(const F& family, int n, double T, State start, State end, EngineOptions opt = {}) {
    Expansion<F> ex(family, start, T, opt);
    return ex.term(n, T, end).value;
}

template <ProxyFamily F>
SeriesEvaluation evaluate_density(const F& family, double T, State start, State end, double tol,
                                  EngineOptions opt = {}) {
    Expansion<F> ex(family, start, T, opt);
    return ex.evaluate_to_tolerance(end, tol);
}

template <ProxyFamily F>
double remainder_bound(const F& family, double T, State start, int N, EngineOptions opt = {}) {
    Expansion<F> ex(family, start, T, opt);
    return ex.remainder_bound(N);
}

// |integral of the truncated series against the reference measure - 1|,
// with N chosen as in evaluate_to_tolerance.
template <ProxyFamily F>
double mass_check(Expansion<F>& ex, int N) {
    const auto m = ex.integrate_series(N, Region{});
    return std::abs(m.value - 1.0);
}

template <ProxyFamily F>
double mass_check(const F& family, double T, State start, double tol, EngineOptions opt = {}) {
    Expansion<F> ex(family, start, T, opt);
    int N = 0;
    while (N < opt.n_max && !(ex.remainder_bound(N) < tol)) ++N;
    return mass_check(ex, N);
}

}  // namespace parametrix
