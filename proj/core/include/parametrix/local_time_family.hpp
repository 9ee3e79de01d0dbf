#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include "parametrix/chart.hpp"
#include "parametrix/coefficient_field.hpp"
#include "parametrix/measure.hpp"
#include "parametrix/special_kernels.hpp"

namespace parametrix {

// Frozen Brownian motion sigma * W started at x0 together with l0 plus its
// symmetric local time at zero. Atom: the path has not reached zero; the
// continuous part lives on {l > l0}.
DensityValue proxy_density_lt(double t, double x0, double l0, double x, double l, double a_bar);
DensityValue hat_density_lt(const CoefficientField& field, double t, double x0, double l0, double x, double l);
double theta_hat_lt(const CoefficientField& field, double t, double x0, double l0, double x, double l,
                    bool with_drift);
MeasureRecipe u_decomposition_lt(double x0, double l0, double x, double l);
MeasureRecipe reference_measure_lt(double x0, double l0);

class LocalTimeFamily {
public:
    static constexpr std::string_view kName = "local-time";

    enum class KernelVariant { driftless, with_drift };

    explicit LocalTimeFamily(CoefficientField field, KernelVariant variant = KernelVariant::driftless,
                             double truncation_k = 8.0);

    const CoefficientField& field() const { return field_; }
    double eta() const { return field_.holder_exponent(); }
    double truncation_k() const { return k_; }
    // The series only represents the SDE when the drift vanishes; the
    // drifted kernel is exposed for smoothing diagnostics only.
    bool series_admissible() const { return variant_ == KernelVariant::driftless && field_.driftless(); }
    bool kernel_vanishes() const { return field_.constant_diffusion() && (variant_ == KernelVariant::driftless || field_.driftless()); }

    void check_state(State z) const;
    void check_pair(State z0, State z) const;
    bool on_atom(State z0, State z) const { return z.a == z0.a; }

    double hat_density(double t, State z0, State z) const {
        namespace k = kernels::unchecked;
        if (z.a == z0.a) {
            const double ct = field_.a(z.x, z0.a) * t;
            return k::gauss(ct, z.x - z0.x) - k::gauss(ct, z.x + z0.x);
        }
        const double a = field_.a(z.x, z.a);
        const double r = std::abs(z.x) + std::abs(z0.x) + (z.a - z0.a);
        return -k::h1(t, r / std::sqrt(a)) / a;
    }

    // Parametrix kernel from zp to z over time t.
    double kernel(double t, State zp, State z) const {
        namespace k = kernels::unchecked;
        const double ap = field_.a(zp.x, zp.a);
        if (z.a == zp.a) {
            const double az = field_.a(z.x, zp.a);
            const double ct = az * t;
            double v = 0.5 * (ap - az) * (k::h2(ct, z.x - zp.x) - k::h2(ct, z.x + zp.x));
            if (variant_ == KernelVariant::with_drift) {
                v -= field_.b(zp.x, zp.a) * (k::h1(ct, z.x - zp.x) + k::h1(ct, z.x + zp.x));
            }
            return v;
        }
        const double az = field_.a(z.x, z.a);
        const double sig = std::sqrt(az);
        const double y = (std::abs(z.x) + std::abs(zp.x) + (z.a - zp.a)) / sig;
        double v = -0.5 * (ap - az) / (az * az) * k::h3(t, y);
        if (variant_ == KernelVariant::with_drift) {
            v -= field_.b(zp.x, zp.a) * drift_sign(zp.x) / (az * sig) * k::h2(t, y);
        }
        return v;
    }

    // Proxy envelope radius reached within time t.
    double radius(double t) const { return k_ * std::sqrt(field_.a_sup() * t); }

    void reference_pieces(State z0, double t, QuadPieces& out) const;
    void convolution_pieces(const ConvolutionQuery& q, QuadPieces& out) const;
    // x-breaks of a strip piece at the given level; `q.z` is ignored for
    // reference strips.
    void strip_x_breaks(const ConvolutionQuery& q, const QuadPiece& p, double level, Breaks& out) const;

    const ChartLayout& chart() const { return chart_; }
    bool has_atom(State z0) const { return z0.x != 0.0; }
    State chart_point(State z0, double rho, double u1, double u2) const { return {rho * u1, z0.a + rho * u2}; }
    void chart_coords(State z0, double rho, State z, double& u1, double& u2) const {
        u1 = z.x / rho;
        u2 = (z.a - z0.a) / rho;
    }
    // Physical breakpoints of the chart panels, used when integrating
    // tabulated terms over the reference measure.
    void chart_level_breaks(State z0, double rho, Breaks& b) const {
        for (double u : chart_.u2_breaks) b.add(z0.a + rho * u);
    }
    void chart_x_breaks(State, double rho, double, Breaks& b) const {
        for (double u : chart_.u1_breaks) b.add(rho * u);
    }
    // Atom chart in the distance |x| to the barrier, on the side of the start.
    double atom_x(State z0, double rho, double v) const {
        return (z0.x > 0.0 ? 1.0 : -1.0) * atom_window(z0, rho).y(v);
    }
    double atom_coord(State z0, double rho, double x, double& weight) const {
        return atom_window(z0, rho).coord(std::abs(x), weight);
    }
    // Value of the continuous-part envelope argument at a chart node; used to
    // skip nodes where every term is negligible.
    double envelope_distance(State z0, State z) const {
        return z.a == z0.a ? std::abs(z.x - z0.x) : std::abs(z.x) + std::abs(z0.x) + (z.a - z0.a);
    }

private:
    AtomWindow atom_window(State z0, double rho) const {
        return AtomWindow::around(std::abs(z0.x), rho, chart_.atom_breaks.front(), chart_.atom_breaks.back());
    }

    CoefficientField field_;
    KernelVariant variant_;
    double k_;
    ChartLayout chart_;
};

}  // namespace parametrix
