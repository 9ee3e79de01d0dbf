#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include "parametrix/chart.hpp"
#include "parametrix/coefficient_field.hpp"
#include "parametrix/measure.hpp"
#include "parametrix/special_kernels.hpp"

namespace parametrix {

// Frozen Brownian motion sigma * W started at x0 with running maximum
// m0 v max W. Atom: the maximum is still m0; continuous part on {m > m0}.
DensityValue proxy_density_max(double t, double x0, double m0, double x, double m, double a_bar);
DensityValue hat_density_max(const CoefficientField& field, double t, double x0, double m0, double x, double m);
double theta_hat_max(const CoefficientField& field, double t, double x0, double m0, double x, double m);
MeasureRecipe u_decomposition_max(double x0, double m0, double x, double m);
MeasureRecipe reference_measure_max(double x0, double m0);

class RunningMaxFamily {
public:
    static constexpr std::string_view kName = "max";

    explicit RunningMaxFamily(CoefficientField field, double truncation_k = 8.0);

    const CoefficientField& field() const { return field_; }
    double eta() const { return field_.holder_exponent(); }
    double truncation_k() const { return k_; }
    bool series_admissible() const { return true; }
    bool kernel_vanishes() const { return field_.constant_diffusion() && field_.driftless(); }

    void check_state(State z) const;
    void check_pair(State z0, State z) const;
    bool on_atom(State z0, State z) const { return z.a == z0.a; }

    double hat_density(double t, State z0, State z) const {
        namespace k = kernels::unchecked;
        if (z.a == z0.a) {
            const double ct = field_.a(z.x, z0.a) * t;
            return k::gauss(ct, z.x - z0.x) - k::gauss(ct, 2.0 * z0.a - (z.x + z0.x));
        }
        return -2.0 * k::h1(field_.a(z.x, z.a) * t, 2.0 * z.a - z.x - z0.x);
    }

    double kernel(double t, State zp, State z) const {
        namespace k = kernels::unchecked;
        const double ap = field_.a(zp.x, zp.a);
        const double b = field_.b(zp.x, zp.a);
        const double ct = field_.a(z.x, z.a) * t;
        const double az = field_.a(z.x, z.a);
        if (z.a == zp.a) {
            const double yr = 2.0 * z.a - z.x - zp.x;
            const double yd = z.x - zp.x;
            return 0.5 * (ap - az) * (k::h2(ct, yd) - k::h2(ct, yr)) + b * (k::h1(ct, yr) - k::h1(ct, yd));
        }
        const double y = 2.0 * z.a - z.x - zp.x;
        // d/dx' of -2 H1(y) is +2 H2(y): the drift enters with a plus sign.
        return 0.5 * (ap - az) * (-2.0 * k::h3(ct, y)) + b * 2.0 * k::h2(ct, y);
    }

    double radius(double t) const { return k_ * std::sqrt(field_.a_sup() * t); }

    void reference_pieces(State z0, double t, QuadPieces& out) const;
    void convolution_pieces(const ConvolutionQuery& q, QuadPieces& out) const;
    void strip_x_breaks(const ConvolutionQuery& q, const QuadPiece& p, double level, Breaks& out) const;

    const ChartLayout& chart() const { return chart_; }
    bool has_atom(State z0) const { return z0.x < z0.a; }
    // u1 = (m - m0) / rho, u2 = (m - x) / rho
    State chart_point(State z0, double rho, double u1, double u2) const {
        const double m = z0.a + rho * u1;
        return {m - rho * u2, m};
    }
    void chart_coords(State z0, double rho, State z, double& u1, double& u2) const {
        u1 = (z.a - z0.a) / rho;
        u2 = (z.a - z.x) / rho;
    }
    void chart_level_breaks(State z0, double rho, Breaks& b) const {
        for (double u : chart_.u1_breaks) b.add(z0.a + rho * u);
    }
    void chart_x_breaks(State, double rho, double level, Breaks& b) const {
        for (double u : chart_.u2_breaks) b.add(level - rho * u);
    }
    // Atom chart in the distance m0 - x to the barrier.
    double atom_x(State z0, double rho, double v) const { return z0.a - atom_window(z0, rho).y(v); }
    double atom_coord(State z0, double rho, double x, double& weight) const {
        return atom_window(z0, rho).coord(z0.a - x, weight);
    }
    double envelope_distance(State z0, State z) const {
        return z.a == z0.a ? std::abs(z.x - z0.x) : 2.0 * z.a - z.x - z0.x;
    }

private:
    AtomWindow atom_window(State z0, double rho) const {
        return AtomWindow::around(z0.a - z0.x, rho, chart_.atom_breaks.front(), chart_.atom_breaks.back());
    }

    CoefficientField field_;
    double k_;
    ChartLayout chart_;
};

}  // namespace parametrix
