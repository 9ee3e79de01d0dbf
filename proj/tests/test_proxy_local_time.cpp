#include <gtest/gtest.h>

#include <cmath>

#include "measure_quadrature.hpp"
#include "oracles.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/local_time_family.hpp"
#include "parametrix/mc_oracle.hpp"
#include "parametrix/special_kernels.hpp"

using namespace parametrix;
using testing_support::Box;
using testing_support::integrate_recipe;

namespace {

// 30-digit evaluations of the closed forms.
constexpr double kAtomExample = 0.344951313888244625989;  // g(1,0) - g(1,2)
constexpr double kContinuousExample = 0.107981933026376103901;  // 2 g(1,2)
constexpr double kSurvival1 = 0.682689492137085897170;
constexpr double kHatExample = 0.115293415718690886342;  // a = 1 + 0.5 sin 1 frozen at (0, 1)

double proxy(double t, State z0, State z, double a) { return proxy_density_lt(t, z0.x, z0.a, z.x, z.a, a).value; }

}  // namespace

TEST(ProxyLocalTime, ClosedFormValues) {
    const auto atom = proxy_density_lt(1, 1, 0, 1, 0, 1);
    EXPECT_EQ(atom.part, Part::Atom);
    EXPECT_NEAR(atom.value, kAtomExample, 1e-15);
    const auto cont = proxy_density_lt(1, 1, 0, 0, 1, 1);
    EXPECT_EQ(cont.part, Part::Continuous);
    EXPECT_NEAR(cont.value, kContinuousExample, 1e-15);
    EXPECT_NEAR(cont.value, oracle::lt_hat(build_field(constant_spec()), 1, {1, 0}, {0, 1}), 1e-16);
}

TEST(ProxyLocalTime, DomainErrors) {
    EXPECT_THROW(proxy_density_lt(1, 1, 0.5, 1, 0.2, 1), DomainError);
    EXPECT_THROW(proxy_density_lt(1, 1, 0, -1, 0, 1), DomainError);
    EXPECT_THROW(proxy_density_lt(0, 1, 0, 1, 0, 1), DomainError);
    EXPECT_THROW(hat_density_lt(build_field(constant_spec()), 1, 1, 0.5, 1, 0.2), DomainError);
}

TEST(ProxyLocalTime, AtomSymmetryIsExact) {
    for (double x0 : {0.1, 0.7, 2.0}) {
        for (double x : {0.05, 0.7, 1.9}) {
            for (double a : {0.5, 1.0, 1.7}) {
                EXPECT_EQ(proxy(0.8, {x0, 0}, {x, 0}, a), proxy(0.8, {x, 0}, {x0, 0}, a));
                EXPECT_EQ(proxy(0.8, {-x0, 0}, {-x, 0}, a), proxy(0.8, {-x, 0}, {-x0, 0}, a));
            }
        }
    }
}

TEST(ProxyLocalTime, NormalizationAndAtomMass) {
    for (double t : {0.1, 1.0, 3.0}) {
        for (double x0 : {-1.0, 0.0, 0.4, 2.0}) {
            for (double a : {0.5, 1.0, 2.0}) {
                const double l0 = 0.3;
                const double r = 9.0 * std::sqrt(a * t);
                Box box{-std::abs(x0) - r, std::abs(x0) + r, r};
                const auto f = [&](State z) { return proxy(t, {x0, l0}, z, a); };
                const double mass = integrate_recipe(reference_measure_lt(x0, l0), f, box);
                EXPECT_NEAR(mass, 1.0, 1e-6) << "t=" << t << " x0=" << x0 << " a=" << a;
                const MeasureRecipe atom_only{reference_measure_lt(x0, l0)[1]};
                const double atom = integrate_recipe(atom_only, f, box);
                EXPECT_NEAR(atom, kernels::survival_probability(t, std::abs(x0), std::sqrt(a)), 1e-8);
                if (x0 == 1.0 && t == 1.0 && a == 1.0) {
                    EXPECT_NEAR(atom, kSurvival1, 1e-8);
                }
            }
        }
    }
}

TEST(ProxyLocalTime, ChapmanKolmogorov) {
    const double a = 1.3, t = 1.0;
    for (State z0 : {State{1.0, 0.0}, State{-0.4, 0.2}}) {
        for (State z : {State{0.5, 0.6}, State{-1.2, 0.9}, State{z0.x * 0.5, z0.a}}) {
            for (double s : {0.3, 0.6}) {
                const auto f = [&](State zp) { return proxy(s, z0, zp, a) * proxy(t - s, zp, z, a); };
                Box box{-8.0, 8.0, 8.0};
                const double lhs = integrate_recipe(u_decomposition_lt(z0.x, z0.a, z.x, z.a), f, box);
                EXPECT_NEAR(lhs, proxy(t, z0, z, a), 1e-4);
            }
        }
    }
}

TEST(ProxyLocalTime, UDecompositionShapes) {
    const auto one = u_decomposition_lt(1, 0, 2, 0);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].kind, MeasurePiece::Kind::Slice);
    EXPECT_EQ(one[0].x_lo, 0.0);
    const auto three = u_decomposition_lt(1, 0, -1, 1);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_EQ(three[0].kind, MeasurePiece::Kind::Strip);
    EXPECT_EQ(three[1].level, 0.0);
    EXPECT_EQ(three[2].level, 1.0);
    EXPECT_EQ(three[2].x_hi, 0.0);  // x x' > 0 with x = -1
    EXPECT_THROW(u_decomposition_lt(1, 0, -1, 0), DomainError);
}

TEST(ProxyLocalTime, NestedMeasureIdentity) {
    // int dnu(z0)(z') int dnu(z')(z) phi = int dnu(z0)(z) int du(z0, z)(z') phi
    const State z0{0.6, 0.2};
    auto phi = [&](State zp, State z) {
        return std::exp(-zp.x * zp.x - z.x * z.x - (zp.a - z0.a) * (zp.a - z0.a) - (z.a - zp.a) * (z.a - zp.a)) *
               (1.0 + 0.3 * std::sin(zp.x + 2.0 * z.x));
    };
    Box outer{-5, 5, 5, {0.0}, 1e-7, 1e-10};
    Box inner{-5, 5, 5, {0.0}, 1e-8, 1e-11};
    const double lhs = integrate_recipe(
        reference_measure_lt(z0.x, z0.a),
        [&](State zp) {
            return integrate_recipe(reference_measure_lt(zp.x, zp.a), [&](State z) { return phi(zp, z); }, inner);
        },
        outer);
    const double rhs = integrate_recipe(
        reference_measure_lt(z0.x, z0.a),
        [&](State z) {
            if (z.a == z0.a && !(z.x * z0.x > 0.0)) return 0.0;
            return integrate_recipe(u_decomposition_lt(z0.x, z0.a, z.x, z.a), [&](State zp) { return phi(zp, z); },
                                    inner);
        },
        outer);
    EXPECT_NEAR(lhs, rhs, 1e-6 * std::abs(lhs));
}

TEST(HatLocalTime, FreezesAtTheEndPoint) {
    const auto flat = build_field(constant_spec());
    EXPECT_EQ(hat_density_lt(flat, 1, 1, 0, 0, 1).value, proxy_density_lt(1, 1, 0, 0, 1, 1).value);
    EXPECT_EQ(hat_density_lt(flat, 0.7, 1, 0, 0.4, 0).value, proxy_density_lt(0.7, 1, 0, 0.4, 0, 1).value);
    const auto f = build_field(sin_spec(0.5));
    EXPECT_NEAR(hat_density_lt(f, 1, 1, 0, 0, 1).value, kHatExample, 1e-14);
    EXPECT_NEAR(hat_density_lt(f, 0.3, -0.5, 0.1, -0.2, 0.1).value,
                oracle::lt_hat(f, 0.3, {-0.5, 0.1}, {-0.2, 0.1}), 1e-14);
}

TEST(KernelLocalTime, MatchesDisplayedFormula) {
    const auto flat = build_field(constant_spec());
    EXPECT_EQ(theta_hat_lt(flat, 0.5, 1, 0, 0, 1, false), 0.0);
    EXPECT_EQ(theta_hat_lt(flat, 0.5, 1, 0, 0.5, 0, false), 0.0);
    const auto f = build_field(sin_spec(0.5));
    // a(1, 0) = a(0, 1), so the coefficient difference vanishes here
    EXPECT_NEAR(theta_hat_lt(f, 0.5, 1, 0, 0, 1, false), 0.0, 1e-15);
    for (State zp : {State{0.3, 0.1}, State{-0.8, 0.0}, State{1.2, 0.4}}) {
        for (State z : {State{0.7, 0.5}, State{-0.2, 0.9}, State{zp.x * 1.5, zp.a}}) {
            const double v = theta_hat_lt(f, 0.4, zp.x, zp.a, z.x, z.a, false);
            EXPECT_NEAR(v, oracle::lt_theta(f, 0.4, {zp.x, zp.a}, {z.x, z.a}), 1e-13 * (1 + std::abs(v)));
        }
    }
}

TEST(KernelLocalTime, DriftTermUsesMinusOneAtZero) {
    const auto f = build_field(constant_spec(1.0, 0.7));
    // only the drift term survives with constant a
    const double at_zero = theta_hat_lt(f, 0.5, 0.0, 0.0, 0.4, 0.3, true);
    const double negative = theta_hat_lt(f, 0.5, -1e-9, 0.0, 0.4, 0.3, true);
    EXPECT_NEAR(at_zero, negative, 1e-6 * std::abs(negative));
    EXPECT_NE(at_zero, 0.0);
    EXPECT_EQ(theta_hat_lt(f, 0.5, 0.0, 0.0, 0.4, 0.3, false), 0.0);
}

TEST(ProxyLocalTime, LocalTimeMarginalMatchesSimulation) {
    // P(L in bin) from the closed form against one-step exact sampling.
    SimulationPlan plan;
    plan.family = Functional::local_time;
    plan.field = build_field(constant_spec());
    plan.T = 1.0;
    plan.paths = 200000;
    plan.seed = 11;
    plan.threads = 1;
    const auto sim = simulate(plan, {0.5, 0.0});
    const double edges[] = {0.0, 0.25, 0.5, 1.0, 2.0};
    for (int b = 0; b < 4; ++b) {
        long count = 0;
        for (const auto& p : sim.samples) count += !p.atom && p.a_T > edges[b] && p.a_T <= edges[b + 1];
        const double frac = static_cast<double>(count) / plan.paths;
        MeasurePiece strip;
        strip.kind = MeasurePiece::Kind::Strip;
        strip.level_lo = edges[b];
        strip.level_hi = edges[b + 1];
        const double prob = integrate_recipe({strip}, [&](State z) { return proxy(1.0, {0.5, 0.0}, z, 1.0); },
                                             Box{-9, 9, 9});
        const double se = std::sqrt(prob * (1 - prob) / plan.paths);
        EXPECT_LT(std::abs(frac - prob), 3.0 * se) << "bin " << b;
    }
}
