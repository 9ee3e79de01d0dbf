#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parametrix/expression.hpp"

namespace parametrix {

enum class CoefficientKind { constant, affine_clamped, sin_perturbed, expression };

std::string_view to_string(CoefficientKind k);
CoefficientKind coefficient_kind_from_string(std::string_view s);

// User-facing description of b(x,u) and a(x,u) = sigma^2. The second argument
// u is the functional coordinate: accumulated local time or running maximum.
//
// Parameters by kind (defaults in brackets):
//   constant        a [1], b [0]
//   affine_clamped  a0 [1], ax [0], au [0], a_min, a_max, b [0]
//                   a = clamp(a0 + ax*x + au*u, a_min, a_max)
//   sin_perturbed   base [1], amplitude [0.5], kx [1], ku [1], phase [0], b [0]
//                   a = base + amplitude*sin(kx*x + ku*u + phase)
//   expression      `expression` gives a, optional `drift_expression` gives b
//                   (otherwise the constant parameter b [0]); optional declared
//                   eta, holder_constant, a_low
struct CoefficientSpec {
    CoefficientKind kind = CoefficientKind::constant;
    std::map<std::string, double> parameters;
    std::optional<std::string> expression;
    std::optional<std::string> drift_expression;
};

// Box and resolution of the validation sweep.
struct ValidationBox {
    double x_lo = -10.0;
    double x_hi = 10.0;
    double u_lo = 0.0;
    double u_hi = 10.0;
    int points = 101;

    static ValidationBox symmetric(double L) { return {-L, L, 0.0, L, 101}; }
};

struct HolderEstimate {
    double exponent = 1.0;
    double constant = 0.0;
    bool inconclusive = false;
};

class CoefficientField {
public:
    double a(double x, double u) const {
        switch (spec_.kind) {
            case CoefficientKind::constant: return p0_;
            case CoefficientKind::affine_clamped: {
                const double v = p0_ + p1_ * x + p2_ * u;
                return v < p3_ ? p3_ : (v > p4_ ? p4_ : v);
            }
            case CoefficientKind::sin_perturbed: return p0_ + p1_ * sin_arg(x, u);
            case CoefficientKind::expression: return (*diffusion_expr_)(x, u);
        }
        return p0_;
    }
    double b(double x, double u) const { return drift_expr_ ? (*drift_expr_)(x, u) : b_const_; }

    double holder_exponent() const { return eta_; }
    double holder_constant() const { return holder_constant_; }
    double a_low() const { return a_low_; }
    double a_sup() const { return a_sup_; }
    double b_sup() const { return b_sup_; }
    // a does not depend on the state: every parametrix correction vanishes
    // with zero drift.
    bool constant_diffusion() const { return constant_a_; }
    bool driftless() const { return !drift_expr_ && b_const_ == 0.0; }
    const CoefficientSpec& spec() const { return spec_; }
    const ValidationBox& box() const { return box_; }

private:
    friend CoefficientField build_field(const CoefficientSpec&, const ValidationBox&);
    friend CoefficientField make_unvalidated_field(const CoefficientSpec&);

    double sin_arg(double x, double u) const { return std::sin(p2_ * x + p3_ * u + p4_); }

    CoefficientSpec spec_;
    ValidationBox box_;
    double p0_ = 1.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0, p4_ = 0.0, p5_ = 0.0;
    double b_const_ = 0.0;
    std::optional<Expression> diffusion_expr_;
    std::optional<Expression> drift_expr_;
    double eta_ = 1.0;
    double holder_constant_ = 0.0;
    double a_low_ = 1.0;
    double a_sup_ = 1.0;
    double b_sup_ = 0.0;
    bool constant_a_ = true;
};

// Builds and validates: ellipticity, sup bounds and the Hoelder modulus
// |a(z) - a(z')| <= H (|x - x'| + |u - u'|)^eta are checked on the grid and on
// sampled pairs. Throws ParseError or ValidationError.
CoefficientField build_field(const CoefficientSpec& spec, const ValidationBox& box = {});

// Largest exponent of the grid whose sampled Hoelder ratio is stable between
// two pair separations four decades apart.
HolderEstimate estimate_holder(const CoefficientField& field, std::vector<double> exponent_grid = {});

// Convenience constructors for the fields used throughout the tests.
CoefficientSpec constant_spec(double a = 1.0, double b = 0.0);
CoefficientSpec sin_spec(double amplitude, double base = 1.0, double b = 0.0);
CoefficientSpec expression_spec(std::string diffusion, std::optional<std::string> drift = std::nullopt);

// JSON: {"kind": "...", "parameters": {...}, "expression": "...", "drift_expression": "..."}
CoefficientSpec parse_coefficient_spec(std::string_view json_text);
CoefficientSpec load_coefficient_spec(const std::string& path);
std::string to_json(const CoefficientSpec& spec);

// sign convention of the drifted local-time kernel: sign(0) = -1
inline double drift_sign(double x) { return x > 0.0 ? 1.0 : -1.0; }

}  // namespace parametrix
