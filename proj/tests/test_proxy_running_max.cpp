#include <gtest/gtest.h>

#include <cmath>

#include "measure_quadrature.hpp"
#include "oracles.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/mc_oracle.hpp"
#include "parametrix/running_max_family.hpp"
#include "parametrix/special_kernels.hpp"

using namespace parametrix;
using testing_support::Box;
using testing_support::integrate_recipe;

namespace {

constexpr double kContinuousExample = 0.215963866052752207802;  // 4 g(1,2)
constexpr double kSurvival1 = 0.682689492137085897170;          // 2 Phi(1) - 1
// Drift-only kernel at (0,0) -> (0,1) with a = b = 1: +2 H2(1, 2) = 6 g(1,2).
constexpr double kDriftExample = 0.323945799079128311703;

double proxy(double t, State z0, State z, double a) { return proxy_density_max(t, z0.x, z0.a, z.x, z.a, a).value; }

}  // namespace

TEST(ProxyRunningMax, ClosedFormValues) {
    EXPECT_NEAR(proxy(1, {0, 0}, {0, 1}, 1), kContinuousExample, 1e-15);
    EXPECT_THROW(proxy_density_max(1, 0, 0, 1.5, 1, 1), DomainError);
    EXPECT_THROW(proxy_density_max(1, 0.5, 0, 0, 1, 1), DomainError);
    EXPECT_THROW(proxy_density_max(1, 0, 0.5, 0, 0.2, 1), DomainError);
    Box box{-10, 1, 10};
    const MeasureRecipe atom{reference_measure_max(0, 1)[1]};
    EXPECT_NEAR(integrate_recipe(atom, [](State z) { return proxy(1, {0, 1}, z, 1); }, box), kSurvival1, 1e-9);
}

TEST(ProxyRunningMax, AtomSymmetryIsExact) {
    for (double x0 : {-0.1, -0.7, -2.0, 0.0}) {
        for (double x : {-0.05, -0.7, -1.9}) {
            EXPECT_EQ(proxy(0.6, {x0, 0}, {x, 0}, 1.4), proxy(0.6, {x, 0}, {x0, 0}, 1.4));
        }
    }
}

TEST(ProxyRunningMax, NormalizationAndMarginals) {
    for (double t : {0.2, 1.0}) {
        for (State z0 : {State{0, 0}, State{-0.5, 0.3}, State{-2, 1}}) {
            for (double a : {0.6, 1.0, 1.8}) {
                const double r = 9.0 * std::sqrt(a * t);
                Box box{z0.x - r, z0.a + r, r, {z0.a}};
                const auto f = [&](State z) { return proxy(t, z0, z, a); };
                const auto ref = reference_measure_max(z0.x, z0.a);
                EXPECT_NEAR(integrate_recipe(ref, f, box), 1.0, 1e-6);
                const double atom = integrate_recipe({ref[1]}, f, box);
                const double cont = integrate_recipe({ref[0]}, f, box);
                EXPECT_NEAR(atom, kernels::survival_probability(t, z0.a - z0.x, std::sqrt(a)), 1e-8);
                EXPECT_NEAR(cont, 1.0 - atom, 1e-6);
                // marginal in x integrates the maximum out
                for (double x : {z0.x - 0.7, z0.a - 0.1, z0.a + 0.4}) {
                    double px = x <= z0.a ? f({x, z0.a}) : 0.0;
                    const double lo = std::max(z0.a, x);
                    px += quad::integrate([&](double m) { return f({x, m}); }, lo, lo + r,
                                          quad::Options{1e-12, 1e-15, 200})
                              .value;
                    EXPECT_NEAR(px, oracle::g(a * t, x - z0.x), 1e-6);
                }
            }
        }
    }
}

TEST(ProxyRunningMax, ChapmanKolmogorov) {
    const double a = 0.8, t = 1.0;
    const State z0{-0.3, 0.0};
    for (State z : {State{0.2, 0.5}, State{-1.0, 0.8}, State{-0.9, 0.0}}) {
        for (double s : {0.25, 0.7}) {
            const auto f = [&](State zp) { return proxy(s, z0, zp, a) * proxy(t - s, zp, z, a); };
            const double lhs =
                integrate_recipe(u_decomposition_max(z0.x, z0.a, z.x, z.a), f, Box{-8, 8, 8, {0.0, z.a}});
            EXPECT_NEAR(lhs, proxy(t, z0, z, a), 1e-4);
        }
    }
}

TEST(ProxyRunningMax, UDecompositionShapes) {
    const auto one = u_decomposition_max(0, 0, -1, 0);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].x_hi, 0.0);
    const auto three = u_decomposition_max(0, 0, 0.5, 1);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_TRUE(three[0].x_bounded_by_level);
    EXPECT_EQ(three[2].level, 1.0);
    EXPECT_THROW(u_decomposition_max(0, 0, 1.5, 1), DomainError);
}

TEST(ProxyRunningMax, NestedMeasureIdentity) {
    const State z0{-0.4, 0.1};
    auto phi = [&](State zp, State z) {
        return std::exp(-zp.x * zp.x - z.x * z.x - (zp.a - z0.a) * (zp.a - z0.a) - (z.a - zp.a) * (z.a - zp.a));
    };
    Box outer{-5, 6, 5, {z0.a}, 1e-7, 1e-10};
    const double lhs = integrate_recipe(
        reference_measure_max(z0.x, z0.a),
        [&](State zp) {
            Box inner{-5, 6, 5, {zp.a}, 1e-8, 1e-11};
            return integrate_recipe(reference_measure_max(zp.x, zp.a), [&](State z) { return phi(zp, z); }, inner);
        },
        outer);
    const double rhs = integrate_recipe(
        reference_measure_max(z0.x, z0.a),
        [&](State z) {
            Box inner{-5, 6, 5, {z0.a, z.a}, 1e-8, 1e-11};
            return integrate_recipe(u_decomposition_max(z0.x, z0.a, z.x, z.a), [&](State zp) { return phi(zp, z); },
                                    inner);
        },
        outer);
    EXPECT_NEAR(lhs, rhs, 1e-6 * std::abs(lhs));
}

TEST(KernelRunningMax, MatchesDisplayedFormulaAndDriftSign) {
    EXPECT_EQ(theta_hat_max(build_field(constant_spec()), 1, 0, 0, 0, 1), 0.0);
    EXPECT_NEAR(theta_hat_max(build_field(constant_spec(1.0, 1.0)), 1, 0, 0, 0, 1), kDriftExample, 1e-15);
    const auto f = build_field(sin_spec(0.5));
    for (State zp : {State{-0.3, 0.1}, State{-1.0, 0.0}}) {
        for (State z : {State{0.2, 0.6}, State{-1.5, 0.4}, State{zp.x - 0.4, zp.a}}) {
            const double v = theta_hat_max(f, 0.4, zp.x, zp.a, z.x, z.a);
            EXPECT_NEAR(v, oracle::max_theta(f, 0.4, {zp.x, zp.a}, {z.x, z.a}), 1e-13 * (1 + std::abs(v)));
        }
    }
}

TEST(KernelRunningMax, DriftKernelConservesMass) {
    // The generator difference integrates to zero against nu in the end
    // point: int theta_t(z', z) dnu(z')(z) = 0 for a constant-a drift field.
    const auto f = build_field(constant_spec(1.0, 0.8));
    const RunningMaxFamily fam(f);
    for (State zp : {State{0.0, 0.0}, State{-0.6, 0.0}}) {
        const double t = 0.5;
        const auto g = [&](State z) { return fam.kernel(t, zp, z); };
        const double total = integrate_recipe(reference_measure_max(zp.x, zp.a), g, Box{-8, 8, 8, {zp.a}});
        EXPECT_NEAR(total, 0.0, 1e-8);
        // the opposite sign of the continuous drift term would not conserve mass
        auto flipped = [&](State z) {
            if (z.a == zp.a) return g(z);
            return g(z) - 2.0 * 0.8 * 2.0 * oracle::H(2, t, 2.0 * z.a - z.x - zp.x);
        };
        EXPECT_GT(std::abs(integrate_recipe(reference_measure_max(zp.x, zp.a), flipped, Box{-8, 8, 8, {zp.a}})),
                  1e-2);
    }
}

TEST(ProxyRunningMax, MaximumMomentsFromSimulation) {
    SimulationPlan plan;
    plan.family = Functional::running_max;
    plan.field = build_field(constant_spec());
    plan.T = 1.0;
    plan.paths = 200000;
    plan.seed = 5;
    plan.threads = 1;
    const auto sim = simulate(plan, {0, 0});
    EXPECT_NEAR(sim.summary.mean_a, 0.797884560802865355880, 3 * sim.summary.se_a);
    long below = 0;
    for (const auto& p : sim.samples) below += p.a_T <= 1.0;
    const double frac = static_cast<double>(below) / plan.paths;
    EXPECT_NEAR(frac, kSurvival1, 3 * std::sqrt(kSurvival1 * (1 - kSurvival1) / plan.paths));
}
