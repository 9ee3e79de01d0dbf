#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/local_time_family.hpp"
#include "parametrix/parametrix_engine.hpp"
#include "parametrix/running_max_family.hpp"

using namespace parametrix;

namespace {

// Partial-sum oracle (30 digits) for sum_{n >= 3} Gamma(1/2)^n / Gamma(1 + n/2).
constexpr double kTailEta1 = 39.8577334357930621278;

EngineOptions one_thread() {
    EngineOptions o;
    o.threads = 1;
    return o;
}

}  // namespace

TEST(RemainderBound, MatchesPartialSums) {
    EXPECT_NEAR(remainder_tail(1.0, 1.0, 1.0, 2), kTailEta1, 1e-12 * kTailEta1);
    EXPECT_EQ(remainder_tail(0.0, 1.0, 1.0, 0), 0.0);
    // general eta against a direct sum
    const double C = 0.4, T = 0.7, eta = 0.5;
    const double x = C * std::pow(T, eta / 2) * std::tgamma(eta / 2);
    double direct = 0.0;
    for (int n = 2; n < 400; ++n) direct += std::pow(x, n) / std::tgamma(1 + n * eta / 2);
    EXPECT_NEAR(remainder_tail(C, T, eta, 1), direct, 1e-12 * direct);
    for (int N = 0; N < 6; ++N) EXPECT_LE(remainder_tail(C, T, eta, N + 1), remainder_tail(C, T, eta, N));
}

TEST(Engine, ConstantCoefficientsAreExact) {
    const auto flat = build_field(constant_spec());
    const LocalTimeFamily lt(flat);
    const RunningMaxFamily mx(flat);
    const auto a = evaluate_density(lt, 1.0, {1, 0}, {1, 0}, 1e-3, one_thread());
    EXPECT_EQ(a.orders_used, 0);
    EXPECT_EQ(a.part, Part::Atom);
    EXPECT_NEAR(a.total, 0.344951313888244625989, 1e-15);
    const auto b = evaluate_density(mx, 1.0, {0, 0}, {0, 1}, 1e-3, one_thread());
    EXPECT_NEAR(b.total, 0.215963866052752207802, 1e-15);
    EXPECT_EQ(b.remainder_bound, 0.0);

    // the correction integrals themselves vanish identically
    EngineOptions o = one_thread();
    o.skip_vanishing_kernel = false;
    Expansion<LocalTimeFamily> ex(lt, {1, 0}, 1.0, o);
    EXPECT_EQ(ex.term(1, 1.0, {-0.5, 0.3}).value, 0.0);
    EXPECT_EQ(ex.term(1, 1.0, {0.4, 0.0}).value, 0.0);
    Expansion<RunningMaxFamily> em(mx, {0, 0}, 1.0, o);
    EXPECT_EQ(em.term(1, 1.0, {0.2, 0.5}).value, 0.0);
}

TEST(Engine, ConstantMassCheck) {
    const auto flat = build_field(constant_spec(1.3));
    EXPECT_LT(mass_check(LocalTimeFamily(flat), 0.7, {0.4, 0.1}, 1e-3, one_thread()), 1e-6);
    EXPECT_LT(mass_check(RunningMaxFamily(flat), 0.7, {-0.4, 0.1}, 1e-3, one_thread()), 1e-6);
}

TEST(Engine, ZeroOrderIsTheHatDensity) {
    const auto f = build_field(sin_spec(0.25));
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(f), {1, 0}, 0.5, one_thread());
    EXPECT_NEAR(ex.term(0, 0.5, {-0.5, 0.3}).value, oracle::lt_hat(f, 0.5, {1, 0}, {-0.5, 0.3}), 1e-15);
    EXPECT_THROW(ex.term(0, 0.5, {-0.5, 0.0}), DomainError);
    EXPECT_THROW(ex.term(-1, 0.5, {0.5, 0.3}), DomainError);
    EXPECT_THROW(ex.term(1, 0.7, {0.5, 0.3}), DomainError);
}

TEST(Engine, FirstOrderMatchesImportanceSampling) {
    const auto f = build_field(sin_spec(0.25));
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(f), {1, 0}, 0.5, one_thread());
    const double v = ex.term(1, 0.5, {-0.5, 0.3}).value;
    const auto mc = oracle::first_order_term(false, f, 0.5, {1, 0}, {-0.5, 0.3}, 2000000, 17);
    EXPECT_LT(std::abs(v - mc.mean), 3.0 * mc.se) << v << " vs " << mc.mean << " +- " << mc.se;
    EXPECT_LT(mc.se, 0.05 * std::abs(mc.mean));
}

TEST(Engine, RemainderToleranceIsReachable) {
    // tol 1e-3 needs at most three orders: amplitude 0.25 up to T = 0.25,
    // amplitude 0.1 up to T = 0.5
    const auto strong = build_field(sin_spec(0.25));
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(strong), {1, 0}, 0.25, one_thread());
    EXPECT_LT(ex.remainder_bound(3), 1e-3);
    EXPECT_GT(ex.smoothing_constant(), 0.0);
    const auto mild = build_field(sin_spec(0.1));
    Expansion<LocalTimeFamily> el(LocalTimeFamily(mild), {1, 0}, 0.5, one_thread());
    EXPECT_LT(el.remainder_bound(3), 1e-3);
    Expansion<RunningMaxFamily> em(RunningMaxFamily(mild), {0, 0}, 0.5, one_thread());
    EXPECT_LT(em.remainder_bound(3), 1e-3);
}

TEST(Engine, TruncationErrorCarriesThePartialSum) {
    const auto f = build_field(sin_spec(0.25));
    EngineOptions o = one_thread();
    o.n_max = 0;
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(f), {1, 0}, 0.25, o);
    try {
        ex.evaluate_to_tolerance({0.3, 0.2}, 1e-3);
        FAIL() << "expected a truncation error";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.partial().orders_used, 0);
        EXPECT_NEAR(e.partial().total, oracle::lt_hat(f, 0.25, {1, 0}, {0.3, 0.2}), 1e-15);
        EXPECT_GT(e.partial().remainder_bound, 1e-3);
    }
}

TEST(Engine, DriftedLocalTimeSeriesIsRejected) {
    const auto f = build_field(constant_spec(1.0, 0.3));
    Expansion<LocalTimeFamily> ex(LocalTimeFamily(f, LocalTimeFamily::KernelVariant::with_drift), {1, 0}, 0.5,
                                  one_thread());
    EXPECT_THROW(ex.evaluate({0.3, 0.2}, 1), DomainError);
}
