#include "parametrix/coefficient_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "parametrix/errors.hpp"

namespace parametrix {

std::string_view to_string(CoefficientKind k) {
    switch (k) {
        case CoefficientKind::constant: return "constant";
        case CoefficientKind::affine_clamped: return "affine_clamped";
        case CoefficientKind::sin_perturbed: return "sin_perturbed";
        case CoefficientKind::expression: return "expression";
    }
    return "constant";
}

CoefficientKind coefficient_kind_from_string(std::string_view s) {
    if (s == "constant") return CoefficientKind::constant;
    if (s == "affine_clamped") return CoefficientKind::affine_clamped;
    if (s == "sin_perturbed") return CoefficientKind::sin_perturbed;
    if (s == "expression") return CoefficientKind::expression;
    throw DomainError("unknown coefficient kind '" + std::string(s) + "'");
}

namespace {

double param(const CoefficientSpec& spec, const std::string& name, std::optional<double> fallback) {
    if (auto it = spec.parameters.find(name); it != spec.parameters.end()) return it->second;
    if (fallback) return *fallback;
    throw DomainError("coefficient kind " + std::string(to_string(spec.kind)) + " requires parameter '" + name + "'");
}

std::optional<double> optional_param(const CoefficientSpec& spec, const std::string& name) {
    if (auto it = spec.parameters.find(name); it != spec.parameters.end()) return it->second;
    return std::nullopt;
}

std::string point_str(double x, double u) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x << ", " << u << ")";
    return os.str();
}

struct Pair {
    double x0, u0, x1, u1;
};

// Grid points of the box, each paired with neighbours at several separations
// along x, u and both diagonals.
std::vector<Pair> grid_pairs(const ValidationBox& box, std::initializer_list<double> separations) {
    std::vector<Pair> out;
    const int n = box.points;
    const double hx = (box.x_hi - box.x_lo) / (n - 1);
    const double hu = (box.u_hi - box.u_lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = box.x_lo + i * hx;
            const double u = box.u_lo + j * hu;
            for (double s : separations) {
                const double dx = s * hx, du = s * hu;
                out.push_back({x, u, x + dx, u});
                out.push_back({x, u, x - dx, u});
                out.push_back({x, u, x, u + du});
                out.push_back({x, u, x + dx, u + du});
                out.push_back({x, u, x - dx, u + du});
            }
        }
    }
    return out;
}

std::vector<Pair> random_pairs(const ValidationBox& box, int count) {
    std::mt19937_64 rng(0x5eedf00dULL);
    std::uniform_real_distribution<double> ux(box.x_lo, box.x_hi), uu(box.u_lo, box.u_hi);
    std::uniform_real_distribution<double> logsep(-6.0, 0.0), unit(-1.0, 1.0);
    std::vector<Pair> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const double x = ux(rng), u = uu(rng);
        const double s = std::pow(10.0, logsep(rng));
        out.push_back({x, u, x + s * unit(rng), std::max(box.u_lo, u + s * unit(rng))});
    }
    return out;
}

double distance(const Pair& p) { return std::abs(p.x1 - p.x0) + std::abs(p.u1 - p.u0); }

double max_ratio(const CoefficientField& f, const std::vector<Pair>& pairs, double eta, const Pair** witness) {
    double best = 0.0;
    for (const auto& p : pairs) {
        const double d = distance(p);
        if (d <= 0.0) continue;
        const double r = std::abs(f.a(p.x1, p.u1) - f.a(p.x0, p.u0)) / std::pow(d, eta);
        if (!(r <= best)) {  // also catches NaN
            best = std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
            if (witness) *witness = &p;
        }
    }
    return best;
}

}  // namespace

CoefficientField make_unvalidated_field(const CoefficientSpec& spec) {
    CoefficientField f;
    f.spec_ = spec;
    const double b = param(spec, "b", 0.0);
    f.b_const_ = b;
    f.b_sup_ = std::abs(b);
    switch (spec.kind) {
        case CoefficientKind::constant: {
            f.p0_ = param(spec, "a", 1.0);
            f.eta_ = 1.0;
            f.holder_constant_ = 0.0;
            f.a_low_ = f.a_sup_ = f.p0_;
            f.constant_a_ = true;
            break;
        }
        case CoefficientKind::affine_clamped: {
            f.p0_ = param(spec, "a0", 1.0);
            f.p1_ = param(spec, "ax", 0.0);
            f.p2_ = param(spec, "au", 0.0);
            f.p3_ = param(spec, "a_min", std::nullopt);
            f.p4_ = param(spec, "a_max", std::nullopt);
            if (!(f.p3_ <= f.p4_)) throw ValidationError("affine_clamped needs a_min <= a_max");
            f.eta_ = 1.0;
            f.holder_constant_ = std::max(std::abs(f.p1_), std::abs(f.p2_));
            f.a_low_ = f.p3_;
            f.a_sup_ = f.p4_;
            f.constant_a_ = (f.p1_ == 0.0 && f.p2_ == 0.0) || f.p3_ == f.p4_;
            break;
        }
        case CoefficientKind::sin_perturbed: {
            f.p0_ = param(spec, "base", 1.0);
            f.p1_ = param(spec, "amplitude", 0.5);
            f.p2_ = param(spec, "kx", 1.0);
            f.p3_ = param(spec, "ku", 1.0);
            f.p4_ = param(spec, "phase", 0.0);
            f.eta_ = 1.0;
            f.holder_constant_ = std::abs(f.p1_) * std::max(std::abs(f.p2_), std::abs(f.p3_));
            f.a_low_ = f.p0_ - std::abs(f.p1_);
            f.a_sup_ = f.p0_ + std::abs(f.p1_);
            f.constant_a_ = f.p1_ == 0.0 || (f.p2_ == 0.0 && f.p3_ == 0.0);
            break;
        }
        case CoefficientKind::expression: {
            if (!spec.expression) throw DomainError("expression kind requires an 'expression' string");
            f.diffusion_expr_ = Expression::compile(*spec.expression);
            f.constant_a_ = !f.diffusion_expr_->depends_on_x() && !f.diffusion_expr_->depends_on_u();
            f.eta_ = optional_param(spec, "eta").value_or(1.0);
            f.holder_constant_ = optional_param(spec, "holder_constant").value_or(0.0);
            f.a_low_ = optional_param(spec, "a_low").value_or(0.0);
            break;
        }
    }
    if (spec.drift_expression) {
        f.drift_expr_ = Expression::compile(*spec.drift_expression);
        if (!f.drift_expr_->depends_on_x() && !f.drift_expr_->depends_on_u()) {
            f.b_const_ = (*f.drift_expr_)(0.0, 0.0);
            f.drift_expr_.reset();
            f.b_sup_ = std::abs(f.b_const_);
        }
    }
    return f;
}

HolderEstimate estimate_holder(const CoefficientField& field, std::vector<double> exponent_grid) {
    if (exponent_grid.empty()) {
        for (int k = 10; k >= 1; --k) exponent_grid.push_back(0.1 * k);
    }
    std::sort(exponent_grid.begin(), exponent_grid.end(), std::greater<>());
    const auto coarse = grid_pairs(field.box(), {1.0});
    const auto fine = grid_pairs(field.box(), {1e-4});
    HolderEstimate best{exponent_grid.back(), 0.0, true};
    for (double eta : exponent_grid) {
        const double rc = max_ratio(field, coarse, eta, nullptr);
        const double rf = max_ratio(field, fine, eta, nullptr);
        if (rc == 0.0 && rf == 0.0) return {eta, 0.0, false};
        if (std::isfinite(rc) && std::isfinite(rf) && rf < 2.0 * rc) return {eta, std::max(rc, rf), false};
        best = {eta, std::max(rc, rf), true};
    }
    return best;
}

CoefficientField build_field(const CoefficientSpec& spec, const ValidationBox& box) {
    if (box.points < 2 || !(box.x_hi > box.x_lo) || !(box.u_hi >= box.u_lo)) throw DomainError("invalid validation box");
    CoefficientField f = make_unvalidated_field(spec);
    f.box_ = box;
    const bool parametric = spec.kind != CoefficientKind::expression;
    const bool declared_floor = parametric || spec.parameters.count("a_low");

    // Ellipticity and sup bounds on the grid.
    const int n = box.points;
    double a_min = std::numeric_limits<double>::infinity(), a_max = 0.0, b_max = 0.0;
    double wx = 0.0, wu = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = box.x_lo + i * (box.x_hi - box.x_lo) / (n - 1);
            const double u = box.u_lo + j * (box.u_hi - box.u_lo) / (n - 1);
            const double a = f.a(x, u);
            const double b = f.b(x, u);
            if (!std::isfinite(a) || !std::isfinite(b)) {
                throw ValidationError("coefficient not finite at " + point_str(x, u));
            }
            if (a < a_min) {
                a_min = a;
                wx = x;
                wu = u;
            }
            a_max = std::max(a_max, a);
            b_max = std::max(b_max, std::abs(b));
        }
    }
    if (declared_floor) {
        if (!(f.a_low_ > 0.0)) throw ValidationError("ellipticity violation: declared floor is not positive");
        if (a_min < f.a_low_ * (1.0 - 1e-12)) {
            throw ValidationError("ellipticity violation: a = " + std::to_string(a_min) + " below floor " +
                                  std::to_string(f.a_low_) + " at " + point_str(wx, wu));
        }
    } else {
        if (!(a_min > 0.0)) {
            throw ValidationError("ellipticity violation: a = " + std::to_string(a_min) + " at " + point_str(wx, wu));
        }
        f.a_low_ = a_min;
    }
    f.a_sup_ = std::max(f.a_sup_, a_max);
    f.b_sup_ = std::max(f.b_sup_, b_max);

    // Hoelder modulus: analytic for the parametric kinds, declared or
    // estimated for expressions.
    if (!f.constant_a_) {
        if (spec.kind == CoefficientKind::expression) {
            const bool declared_eta = spec.parameters.count("eta") > 0;
            const bool declared_const = spec.parameters.count("holder_constant") > 0;
            if (!declared_eta || !declared_const) {
                HolderEstimate est;
                if (declared_eta) {
                    est = estimate_holder(f, {f.eta_});
                } else {
                    est = estimate_holder(f);
                }
                if (est.inconclusive) {
                    const auto fine = grid_pairs(box, {1e-4});
                    const Pair* w = nullptr;
                    max_ratio(f, fine, est.exponent, &w);
                    std::string where = w ? point_str(w->x0, w->u0) + " - " + point_str(w->x1, w->u1) : "";
                    throw ValidationError("Hoelder violation: ratio at exponent " + std::to_string(est.exponent) +
                                          " does not stabilise under refinement, witness pair " + where);
                }
                f.eta_ = est.exponent;
                if (!declared_const) f.holder_constant_ = 1.25 * est.constant;
            }
        }
        if (!(f.eta_ > 0.0 && f.eta_ <= 1.0)) throw ValidationError("Hoelder exponent must lie in (0, 1]");
        std::vector<Pair> pairs = grid_pairs(box, {1.0, 4.0, 16.0, 1e-3});
        auto extra = random_pairs(box, 4000);
        pairs.insert(pairs.end(), extra.begin(), extra.end());
        const Pair* w = nullptr;
        const double r = max_ratio(f, pairs, f.eta_, &w);
        if (r > f.holder_constant_ * (1.0 + 1e-9) + 1e-12) {
            throw ValidationError("Hoelder violation: |da|/dist^" + std::to_string(f.eta_) + " = " + std::to_string(r) +
                                  " exceeds H = " + std::to_string(f.holder_constant_) + " for pair " +
                                  point_str(w->x0, w->u0) + " - " + point_str(w->x1, w->u1));
        }
    }
    return f;
}

CoefficientSpec constant_spec(double a, double b) {
    CoefficientSpec s;
    s.kind = CoefficientKind::constant;
    s.parameters = {{"a", a}, {"b", b}};
    return s;
}

CoefficientSpec sin_spec(double amplitude, double base, double b) {
    CoefficientSpec s;
    s.kind = CoefficientKind::sin_perturbed;
    s.parameters = {{"base", base}, {"amplitude", amplitude}, {"b", b}};
    return s;
}

CoefficientSpec expression_spec(std::string diffusion, std::optional<std::string> drift) {
    CoefficientSpec s;
    s.kind = CoefficientKind::expression;
    s.expression = std::move(diffusion);
    s.drift_expression = std::move(drift);
    return s;
}

}  // namespace parametrix
