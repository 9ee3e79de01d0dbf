#include "parametrix/running_max_family.hpp"

#include <cmath>

#include "parametrix/errors.hpp"

namespace parametrix {

namespace {

namespace k = kernels::unchecked;

void require_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be positive");
}

void require_pair(double x0, double m0, double x, double m) {
    if (!std::isfinite(x0) || !std::isfinite(m0) || !std::isfinite(x) || !std::isfinite(m)) {
        throw DomainError("running-max state must be finite");
    }
    if (x0 > m0) throw DomainError("start state violates x0 <= m0");
    if (x > m) throw DomainError("state violates x <= m");
    if (m < m0) throw DomainError("running maximum cannot decrease (m < m0)");
}

MeasurePiece below_slice(std::string_view label, double level, bool closed) {
    MeasurePiece p;
    p.kind = MeasurePiece::Kind::Slice;
    p.label = label;
    p.level = level;
    p.x_lo = -kInf;
    p.x_hi = level;
    p.closed = closed;
    return p;
}

}  // namespace

DensityValue proxy_density_max(double t, double x0, double m0, double x, double m, double a_bar) {
    require_time(t);
    if (!(a_bar > 0.0)) throw DomainError("frozen variance must be positive");
    require_pair(x0, m0, x, m);
    const double ct = a_bar * t;
    if (m == m0) return {Part::Atom, k::gauss(ct, x - x0) - k::gauss(ct, 2.0 * m0 - (x + x0))};
    return {Part::Continuous, -2.0 * k::h1(ct, 2.0 * m - x - x0)};
}

DensityValue hat_density_max(const CoefficientField& field, double t, double x0, double m0, double x, double m) {
    require_time(t);
    require_pair(x0, m0, x, m);
    const RunningMaxFamily fam(field);
    return {m == m0 ? Part::Atom : Part::Continuous, fam.hat_density(t, {x0, m0}, {x, m})};
}

double theta_hat_max(const CoefficientField& field, double t, double x0, double m0, double x, double m) {
    require_time(t);
    require_pair(x0, m0, x, m);
    const RunningMaxFamily fam(field);
    return fam.kernel(t, {x0, m0}, {x, m});
}

MeasureRecipe u_decomposition_max(double x0, double m0, double x, double m) {
    require_pair(x0, m0, x, m);
    MeasureRecipe out;
    if (m == m0) {
        out.push_back(below_slice("atom", m0, false));
        return out;
    }
    MeasurePiece strip;
    strip.kind = MeasurePiece::Kind::Strip;
    strip.label = "strip";
    strip.level_lo = m0;  // x' v x0 v m0 < m' reduces to x' < m' and m0 < m'
    strip.level_hi = m;
    strip.x_bounded_by_level = true;
    out.push_back(strip);
    out.push_back(below_slice("start-atom", m0, false));
    out.push_back(below_slice("end-atom", m, false));
    return out;
}

MeasureRecipe reference_measure_max(double x0, double m0) {
    if (!(x0 <= m0)) throw DomainError("start state violates x0 <= m0");
    MeasureRecipe out;
    MeasurePiece strip;
    strip.kind = MeasurePiece::Kind::Strip;
    strip.label = "continuous";
    strip.level_lo = m0;
    strip.level_hi = kInf;
    strip.x_bounded_by_level = true;
    strip.closed = true;
    out.push_back(strip);
    out.push_back(below_slice("atom", m0, true));
    return out;
}

RunningMaxFamily::RunningMaxFamily(CoefficientField field, double truncation_k)
    : field_(std::move(field)), k_(truncation_k) {
    chart_.u1_breaks = {0.0, 0.5, 1.5, 3.0, 6.0};
    chart_.u2_breaks = {0.0, 0.5, 1.5, 3.0, 6.0};
    chart_.atom_breaks = uniform_breaks(-6.0, 6.0, 16);
}

void RunningMaxFamily::check_state(State z) const {
    if (!std::isfinite(z.x) || !std::isfinite(z.a) || z.x > z.a) {
        throw DomainError("running-max state needs finite x <= m");
    }
}

void RunningMaxFamily::check_pair(State z0, State z) const { require_pair(z0.x, z0.a, z.x, z.a); }

void RunningMaxFamily::reference_pieces(State z0, double t, QuadPieces& out) const {
    out.n = 0;
    const double r = radius(t);
    // continuous part needs 2m - x - x0 <= r with x <= m, hence m <= x0 + r
    const double hi = z0.x + r;
    if (hi > z0.a) {
        auto& p = out.push();
        p.strip = true;
        p.tag = 1;
        p.level_breaks.clear();
        p.level_breaks.add(z0.a + 0.125 * (hi - z0.a));
        p.level_breaks.add(z0.a + 0.375 * (hi - z0.a));
        if (!p.level_breaks.finish(z0.a, hi)) --out.n;
    }
    auto& a = out.push();
    a.strip = false;
    a.level = z0.a;
    a.x_breaks.clear();
    a.x_breaks.add(z0.x);
    if (!a.x_breaks.finish(z0.x - r, std::min(z0.a, z0.x + r))) --out.n;
}

void RunningMaxFamily::convolution_pieces(const ConvolutionQuery& q, QuadPieces& out) const {
    out.n = 0;
    const double rs = radius(q.s), rg = radius(q.gap);
    const double rho_g = rg / k_;
    const double x0 = q.z0.x, m0 = q.z0.a, x = q.z.x, m = q.z.a;
    if (m == m0) {
        auto& p = out.push();
        p.strip = false;
        p.level = m0;
        p.x_breaks.clear();
        p.x_breaks.add(x0);
        p.x_breaks.add(x);
        p.x_breaks.add(x - rho_g);
        p.x_breaks.add(x + rho_g);
        if (!p.x_breaks.finish(std::max(x0 - rs, x - rg), std::min({m0, x0 + rs, x + rg}))) --out.n;
        return;
    }
    {
        // strip m0 < m' < m with max(2m' - x0 - rs, 2m - x - rg) <= x' <= m'
        const double lo = std::max(m0, 2.0 * m - x - rg);
        const double hi = std::min(m, x0 + rs);
        if (hi > lo) {
            auto& p = out.push();
            p.strip = true;
            p.tag = 0;
            p.level_breaks.clear();
            p.level_breaks.add(0.5 * (2.0 * m - x - rg + x0 + rs));
            p.level_breaks.add(m - rho_g);
            p.level_breaks.add(m0 + rs / k_);
            if (!p.level_breaks.finish(lo, hi)) --out.n;
        }
    }
    {
        // start atom at m0: x' < m0, kernel argument 2m - x - x' <= rg
        auto& p = out.push();
        p.strip = false;
        p.level = m0;
        p.x_breaks.clear();
        p.x_breaks.add(x0);
        if (!p.x_breaks.finish(std::max(x0 - rs, 2.0 * m - x - rg), std::min(m0, x0 + rs))) --out.n;
    }
    {
        // end atom at m: source on the continuous part at level m
        auto& p = out.push();
        p.strip = false;
        p.level = m;
        p.x_breaks.clear();
        p.x_breaks.add(x);
        p.x_breaks.add(x - rho_g);
        p.x_breaks.add(x + rho_g);
        if (!p.x_breaks.finish(std::max(2.0 * m - x0 - rs, x - rg), std::min(m, x + rg))) --out.n;
    }
}

void RunningMaxFamily::strip_x_breaks(const ConvolutionQuery& q, const QuadPiece& p, double level,
                                      Breaks& out) const {
    out.clear();
    double lo = 2.0 * level - q.z0.x - radius(q.s);
    if (p.tag == 0) lo = std::max(lo, 2.0 * q.z.a - q.z.x - radius(q.gap));
    const double rho = std::sqrt(field_.a_sup() * (p.tag == 1 ? q.s : std::min(q.s, q.gap)));
    out.add(level - rho);
    out.finish(lo, level);
}

}  // namespace parametrix
