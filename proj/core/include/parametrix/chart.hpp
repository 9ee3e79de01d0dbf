#pragma once

#include <cmath>
#include <vector>

namespace parametrix {

// Scaled coordinates on which series terms are tabulated. Continuous-part
// coordinates (u1, u2) and atom coordinate v are measured in units of
// rho(s) = sqrt(a_sup * s); the breaks delimit polynomial panels and sit
// on the kinks of the densities.
struct ChartLayout {
    std::vector<double> u1_breaks;
    std::vector<double> u2_breaks;
    std::vector<double> atom_breaks;
};

inline std::vector<double> uniform_breaks(double lo, double hi, int panels) {
    std::vector<double> b(panels + 1);
    for (int i = 0; i <= panels; ++i) b[i] = lo + (hi - lo) * i / panels;
    b.back() = hi;
    return b;
}

// The atom slice is tabulated in y, the distance to the killing barrier
// (|x| for local time, m0 - x for the maximum), on a window around the
// start distance d. Far from the barrier the window is d -/+ w rho; as rho
// grows its lower edge slides smoothly onto the barrier (softplus), so a
// fixed chart node never sees the barrier pass through it and values stay
// smooth in time. Between the barrier and the lower edge the term is
// linearly ramped to its zero at the barrier; that strip is narrower than
// rho * log(2) and the term is negligible there when it is not thin.
struct AtomWindow {
    double lo;
    double hi;
    double v_lo;
    double v_hi;

    static AtomWindow around(double d, double rho, double v_lo, double v_hi) {
        const double w = v_hi;
        const double e = d / rho - w;
        const double lo = e > 30.0 ? d - w * rho : rho * std::log1p(std::exp(e));
        return {lo, d + w * rho, v_lo, v_hi};
    }

    double y(double v) const { return lo + (hi - lo) * (v - v_lo) / (v_hi - v_lo); }
    // Chart coordinate of distance y; `weight` is the ramp factor below lo.
    double coord(double yy, double& weight) const {
        if (yy < lo) {
            weight = yy > 0.0 ? yy / lo : 0.0;
            return v_lo;
        }
        weight = 1.0;
        return v_lo + (v_hi - v_lo) * (yy - lo) / (hi - lo);
    }
};

}  // namespace parametrix
