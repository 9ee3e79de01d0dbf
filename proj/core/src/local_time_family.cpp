#include "parametrix/local_time_family.hpp"

#include <cmath>
#include <string>

#include "parametrix/errors.hpp"

namespace parametrix {

namespace {

namespace k = kernels::unchecked;

void require_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be positive");
}

void require_pair(double x0, double l0, double x, double l) {
    if (!std::isfinite(x0) || !std::isfinite(l0) || !std::isfinite(x) || !std::isfinite(l)) {
        throw DomainError("local-time state must be finite");
    }
    if (l0 < 0.0) throw DomainError("local time must be nonnegative");
    if (l < l0) throw DomainError("local time cannot decrease (l < l0)");
    if (l == l0 && x * x0 < 0.0) throw DomainError("atom slice l = l0 requires x * x0 >= 0");
}

// One-sided half-line in x' matching the sign of `ref`, open at zero.
MeasurePiece same_sign_slice(std::string_view label, double level, double ref) {
    MeasurePiece p;
    p.kind = MeasurePiece::Kind::Slice;
    p.label = label;
    p.level = level;
    if (ref > 0.0) {
        p.x_lo = 0.0;
        p.x_hi = kInf;
    } else if (ref < 0.0) {
        p.x_lo = -kInf;
        p.x_hi = 0.0;
    } else {
        p.x_lo = p.x_hi = 0.0;  // {x' * 0 > 0} is empty
    }
    return p;
}

}  // namespace

std::string_view to_string(Part p) { return p == Part::Atom ? "atom" : "continuous"; }

DensityValue proxy_density_lt(double t, double x0, double l0, double x, double l, double a_bar) {
    require_time(t);
    if (!(a_bar > 0.0)) throw DomainError("frozen variance must be positive");
    require_pair(x0, l0, x, l);
    if (l == l0) {
        const double ct = a_bar * t;
        return {Part::Atom, k::gauss(ct, x - x0) - k::gauss(ct, x + x0)};
    }
    const double r = std::abs(x) + std::abs(x0) + l - l0;
    return {Part::Continuous, -k::h1(t, r / std::sqrt(a_bar)) / a_bar};
}

DensityValue hat_density_lt(const CoefficientField& field, double t, double x0, double l0, double x, double l) {
    require_time(t);
    require_pair(x0, l0, x, l);
    const LocalTimeFamily fam(field);
    const double v = fam.hat_density(t, {x0, l0}, {x, l});
    return {l == l0 ? Part::Atom : Part::Continuous, v};
}

double theta_hat_lt(const CoefficientField& field, double t, double x0, double l0, double x, double l,
                    bool with_drift) {
    require_time(t);
    require_pair(x0, l0, x, l);
    const LocalTimeFamily fam(field, with_drift ? LocalTimeFamily::KernelVariant::with_drift
                                                : LocalTimeFamily::KernelVariant::driftless);
    return fam.kernel(t, {x0, l0}, {x, l});
}

MeasureRecipe u_decomposition_lt(double x0, double l0, double x, double l) {
    if (l0 < 0.0 || l < l0) throw DomainError("u decomposition needs l >= l0 >= 0");
    MeasureRecipe out;
    if (l == l0) {
        if (!(x * x0 > 0.0)) throw DomainError("u decomposition on the atom slice needs x * x0 > 0");
        out.push_back(same_sign_slice("atom", l0, x0));
        return out;
    }
    MeasurePiece strip;
    strip.kind = MeasurePiece::Kind::Strip;
    strip.label = "strip";
    strip.level_lo = l0;
    strip.level_hi = l;
    out.push_back(strip);
    out.push_back(same_sign_slice("start-atom", l0, x0));
    out.push_back(same_sign_slice("end-atom", l, x));
    return out;
}

MeasureRecipe reference_measure_lt(double x0, double l0) {
    if (l0 < 0.0) throw DomainError("local time must be nonnegative");
    MeasureRecipe out;
    MeasurePiece strip;
    strip.kind = MeasurePiece::Kind::Strip;
    strip.label = "continuous";
    strip.level_lo = l0;
    strip.level_hi = kInf;
    out.push_back(strip);
    MeasurePiece atom;
    atom.kind = MeasurePiece::Kind::Slice;
    atom.label = "atom";
    atom.level = l0;
    atom.closed = true;
    atom.x_lo = x0 >= 0.0 ? 0.0 : -kInf;
    atom.x_hi = x0 <= 0.0 ? 0.0 : kInf;
    if (x0 == 0.0) {
        atom.x_lo = -kInf;
        atom.x_hi = kInf;
    }
    out.push_back(atom);
    return out;
}

LocalTimeFamily::LocalTimeFamily(CoefficientField field, KernelVariant variant, double truncation_k)
    : field_(std::move(field)), variant_(variant), k_(truncation_k) {
    chart_.u1_breaks = {-6.0, -3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0, 6.0};
    chart_.u2_breaks = {0.0, 0.5, 1.5, 3.0, 6.0};
    chart_.atom_breaks = uniform_breaks(-6.0, 6.0, 16);
}

void LocalTimeFamily::check_state(State z) const {
    if (!std::isfinite(z.x) || !std::isfinite(z.a) || z.a < 0.0) {
        throw DomainError("local-time state needs finite x and l >= 0");
    }
}

void LocalTimeFamily::check_pair(State z0, State z) const {
    check_state(z0);
    check_state(z);
    require_pair(z0.x, z0.a, z.x, z.a);
}

// Piece tags: 0 = convolution strip, 1 = reference strip.
void LocalTimeFamily::reference_pieces(State z0, double t, QuadPieces& out) const {
    out.n = 0;
    const double r = radius(t);
    const double reach = r - std::abs(z0.x);  // how far the local time can grow
    if (reach > 0.0) {
        auto& p = out.push();
        p.strip = true;
        p.tag = 1;
        p.level_breaks.clear();
        p.level_breaks.add(z0.a + 0.125 * reach);
        p.level_breaks.add(z0.a + 0.375 * reach);
        p.level_breaks.finish(z0.a, z0.a + reach);
    }
    auto& a = out.push();
    a.strip = false;
    a.level = z0.a;
    a.x_breaks.clear();
    double lo = z0.x - r, hi = z0.x + r;
    if (z0.x > 0.0) lo = std::max(lo, 0.0);
    if (z0.x < 0.0) hi = std::min(hi, 0.0);
    a.x_breaks.add(z0.x);
    a.x_breaks.add(0.0);
    if (!a.x_breaks.finish(lo, hi)) --out.n;
}

void LocalTimeFamily::convolution_pieces(const ConvolutionQuery& q, QuadPieces& out) const {
    out.n = 0;
    const double rs = radius(q.s), rg = radius(q.gap);
    const double ax0 = std::abs(q.z0.x), ax = std::abs(q.z.x);
    const double rho_s = rs / k_, rho_g = rg / k_;
    if (q.z.a == q.z0.a) {
        // single atom slice {x0 x' > 0} at l0
        if (q.z0.x == 0.0) return;
        auto& p = out.push();
        p.strip = false;
        p.level = q.z0.a;
        p.x_breaks.clear();
        double lo = std::max(q.z0.x - rs, q.z.x - rg), hi = std::min(q.z0.x + rs, q.z.x + rg);
        if (q.z0.x > 0.0) lo = std::max(lo, 0.0);
        else hi = std::min(hi, 0.0);
        p.x_breaks.add(q.z0.x);
        p.x_breaks.add(q.z.x);
        p.x_breaks.add(q.z.x - rho_g);
        p.x_breaks.add(q.z.x + rho_g);
        if (!p.x_breaks.finish(lo, hi)) --out.n;
        return;
    }
    const double l0 = q.z0.a, l = q.z.a;
    {
        // strip l0 < l' < l: needs |x'| + |x0| + l' - l0 <= rs and |x| + |x'| + l - l' <= rg
        const double lo = std::max(l0, l - (rg - ax));
        const double hi = std::min(l, l0 + (rs - ax0));
        if (hi > lo) {
            auto& p = out.push();
            p.strip = true;
            p.tag = 0;
            p.level_breaks.clear();
            p.level_breaks.add(0.5 * (rs - ax0 + l0 - rg + ax + l));
            p.level_breaks.add(l - rho_g);
            p.level_breaks.add(l0 + rho_s);
            if (!p.level_breaks.finish(lo, hi)) --out.n;
        }
    }
    if (q.z0.x != 0.0) {
        // start atom {x' x0 > 0} at l0, then kernel crosses to level l
        const double xr = rg - ax - (l - l0);
        if (xr > 0.0) {
            auto& p = out.push();
            p.strip = false;
            p.level = l0;
            p.x_breaks.clear();
            double lo, hi;
            if (q.z0.x > 0.0) {
                lo = std::max(0.0, q.z0.x - rs);
                hi = std::min(q.z0.x + rs, xr);
            } else {
                lo = std::max(q.z0.x - rs, -xr);
                hi = std::min(0.0, q.z0.x + rs);
            }
            p.x_breaks.add(q.z0.x);
            if (!p.x_breaks.finish(lo, hi)) --out.n;
        }
    }
    if (q.z.x != 0.0) {
        // end atom {x x' > 0} at l: source on the continuous part at level l
        const double xr = rs - ax0 - (l - l0);
        if (xr > 0.0) {
            auto& p = out.push();
            p.strip = false;
            p.level = l;
            p.x_breaks.clear();
            double lo, hi;
            if (q.z.x > 0.0) {
                lo = std::max(0.0, q.z.x - rg);
                hi = std::min(q.z.x + rg, xr);
            } else {
                lo = std::max(q.z.x - rg, -xr);
                hi = std::min(0.0, q.z.x + rg);
            }
            p.x_breaks.add(q.z.x);
            p.x_breaks.add(q.z.x - rho_g);
            p.x_breaks.add(q.z.x + rho_g);
            if (!p.x_breaks.finish(lo, hi)) --out.n;
        }
    }
}

void LocalTimeFamily::strip_x_breaks(const ConvolutionQuery& q, const QuadPiece& p, double level, Breaks& out) const {
    out.clear();
    double xr;
    if (p.tag == 1) {
        xr = radius(q.s) - std::abs(q.z0.x) - (level - q.z0.a);
    } else {
        xr = std::min(radius(q.s) - std::abs(q.z0.x) - (level - q.z0.a),
                      radius(q.gap) - std::abs(q.z.x) - (q.z.a - level));
    }
    if (!(xr > 0.0)) return;
    const double rho = std::sqrt(field_.a_sup() * (p.tag == 1 ? q.s : std::min(q.s, q.gap)));
    out.add(0.0);
    out.add(-std::min(rho, 0.5 * xr));
    out.add(std::min(rho, 0.5 * xr));
    out.finish(-xr, xr);
}

}  // namespace parametrix
