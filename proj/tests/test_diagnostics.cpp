#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "parametrix/diagnostics.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/local_time_family.hpp"
#include "parametrix/running_max_family.hpp"
#include "parametrix/special_kernels.hpp"

using namespace parametrix;

namespace {

// Gamma(0.3)^3 Gamma(0.7) / Gamma(1.6) * 0.5^0.6, 30 digits.
constexpr double kBetaExample = 25.6608039188178335;
constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST(BetaIntegral, ClosedFormExamples) {
    EXPECT_NEAR(beta_integral_closed_form(1, 0.5, 0.0, 1.0), 2.0, 1e-14);
    EXPECT_NEAR(beta_integral_closed_form(2, 0.5, 0.0, 1.0), kPi, 1e-14);
    EXPECT_NEAR(beta_integral_closed_form(3, 0.7, -0.3, 0.5), kBetaExample, 1e-13 * kBetaExample);
}

TEST(BetaIntegral, NestedQuadratureAgrees) {
    const auto one = check_beta_integral(1, 0.5, 0.0, 1.0);
    EXPECT_NEAR(one.numeric, 2.0, 1e-10);
    const auto two = check_beta_integral(2, 0.5, 0.0, 1.0);
    EXPECT_NEAR(two.numeric, kPi, 1e-9);
    const auto three = check_beta_integral(3, 0.7, -0.3, 0.5);
    EXPECT_LT(three.rel_err, 1e-8) << three.numeric;
    EXPECT_GT(three.evaluations, 0);
    EXPECT_THROW(check_beta_integral(0, 0.5, 0.0, 1.0), DomainError);
    EXPECT_THROW(check_beta_integral(2, 1.0, 0.0, 1.0), DomainError);
}

TEST(PassageConvolution, HittingTimesAdd) {
    EXPECT_NEAR(passage_convolution(1.0, 0.5, 0.5), kernels::passage_density(1.0, 1.0), 1e-10);
    const auto r = check_passage_convolution({0.1, 1.0}, {0.3, 2.0}, {0.25, 4.0});
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.abs_err.size(), 8u);
    EXPECT_LT(r.max_abs_err, 1e-6);
}

TEST(FitConstants, FindsAndRejects) {
    // exact Gaussian values at c = 2 sit on the envelope with C = 3
    std::vector<double> y, v;
    for (int i = 0; i <= 20; ++i) {
        y.push_back(0.3 * i);
        v.push_back(3.0 * oracle::g(2.0, y.back()));
    }
    auto env = [&](double c, std::size_t i) { return std::log(oracle::g(c, y[i])); };
    const auto ok = fit_constants(v, env, {});
    EXPECT_TRUE(ok.found);
    EXPECT_LE(ok.C, 3.0 + 1e-9);
    // values with heavier than Gaussian tails: no constant in the box
    std::vector<double> heavy;
    for (double x : y) heavy.push_back(1.0 / (1.0 + x * x));
    const auto bad = fit_constants(heavy, [&](double c, std::size_t i) { return -y[i] * y[i] * 4.0 / c; }, {});
    EXPECT_FALSE(bad.found);
    EXPECT_GT(bad.C, 100.0);
    EXPECT_GT(bad.witness, 0u);
}

TEST(ConvolutionLemma, BothFamiliesAdmitConstants) {
    std::vector<LemmaEndpoint> lt, mx;
    for (double x : {-0.5, 0.5}) lt.push_back({{-0.3, 0.0}, {x, 0.5}});
    for (double x : {-1.5, 0.0}) mx.push_back({{-1.0, 0.0}, {x, 0.5}});
    for (double s : {0.1, 0.5, 0.9}) {
        const auto a = check_convolution_lemma(Functional::local_time, 1.0, s, lt);
        EXPECT_TRUE(a.pass) << to_json(a);
        const auto b = check_convolution_lemma(Functional::running_max, 1.0, s, mx);
        EXPECT_TRUE(b.pass) << to_json(b);
    }
    // the integrand stays integrable as s approaches t
    const double near_end = convolution_lemma_lhs(Functional::local_time, 1.0, 0.999, {-0.3, 0.0}, {0.5, 0.5});
    EXPECT_TRUE(std::isfinite(near_end));
    EXPECT_GT(near_end, 0.0);
}

TEST(KernelEstimates, DerivativesAndBounds) {
    // the barrier kernel subtracts the image through m0
    EXPECT_NEAR(proxy_kernel_derivative(ProxyKernel::reflected, 0, 1.0, -0.3, -0.4, 1.0, 0.0),
                oracle::g(1.0, -0.1) - oracle::g(1.0, 0.7), 1e-15);
    EXPECT_NEAR(proxy_kernel_derivative(ProxyKernel::killed, 0, 1.0, 0.3, 0.4, 1.0, 0.0),
                oracle::g(1.0, 0.1) - oracle::g(1.0, 0.7), 1e-15);
    // central differences for the first and second derivatives
    const double h = 1e-4;
    for (ProxyKernel k : {ProxyKernel::killed, ProxyKernel::reflected}) {
        const double sgn = k == ProxyKernel::killed ? 1.0 : -1.0;
        const double x0 = 0.4 * sgn, x = 1.2 * sgn;
        auto f = [&](int r, double y0) { return proxy_kernel_derivative(k, r, 0.7, y0, x, 1.3, 0.0); };
        EXPECT_NEAR(f(1, x0), (f(0, x0 + h) - f(0, x0 - h)) / (2 * h), 1e-7);
        EXPECT_NEAR(f(2, x0), (f(1, x0 + h) - f(1, x0 - h)) / (2 * h), 1e-6);
    }
    std::vector<std::pair<double, double>> pos, neg;
    for (double x0 : {0.1, 0.5, 2.0}) {
        for (double x : {0.1, 1.0, 3.0}) {
            pos.push_back({x0, x});
            neg.push_back({-x0, -x});
        }
    }
    for (double beta : {0.0, 0.5, 1.0}) {
        for (double t : {0.1, 1.0}) {
            const auto killed = check_kernel_estimates(ProxyKernel::killed, beta, t, pos);
            EXPECT_TRUE(killed.pass) << to_json(killed);
            EXPECT_TRUE(killed.symmetric);
            const auto refl = check_kernel_estimates(ProxyKernel::reflected, beta, t, neg);
            EXPECT_TRUE(refl.pass) << to_json(refl);
        }
    }
    EXPECT_THROW(check_kernel_estimates(ProxyKernel::reflected, 0.5, 1.0, {{0.1, -0.5}}), DomainError);
    EXPECT_THROW(check_kernel_estimates(ProxyKernel::killed, 0.5, 1.0, {{-0.1, 0.5}}), DomainError);
}

TEST(KernelEstimates, FirstDerivativeOnTheBarrierHasNoVanishingFactor) {
    // At x0 = m0 the first x0-derivative of the reflected kernel is
    // -2 g'(x - m0), which is nonzero, while the weight |m0 - x0|^beta is 0.
    const double d = proxy_kernel_derivative(ProxyKernel::reflected, 1, 1.0, 0.0, -0.5, 1.0, 0.0);
    EXPECT_NEAR(d, -2.0 * 0.5 * oracle::g(1.0, 0.5), 1e-14);
    EXPECT_EQ(proxy_kernel_derivative(ProxyKernel::reflected, 2, 1.0, 0.0, -0.5, 1.0, 0.0), 0.0);
    const std::vector<std::pair<double, double>> on_barrier{{0.0, -0.5}, {-1.0, -0.5}};
    const auto r = check_kernel_estimates(ProxyKernel::reflected, 0.5, 1.0, on_barrier);
    EXPECT_FALSE(r.pass);
    ASSERT_EQ(r.fits.size(), 3u);
    EXPECT_TRUE(r.fits[0].found);
    EXPECT_FALSE(r.fits[1].found);
    EXPECT_EQ(r.fits[1].witness, 0u);
    EXPECT_TRUE(r.fits[2].found);
    EXPECT_TRUE(check_kernel_estimates(ProxyKernel::reflected, 0.0, 1.0, on_barrier).pass);
}

TEST(Smoothing, ConstantFieldIsDegenerate) {
    const auto flat = build_field(constant_spec());
    const auto fit = check_smoothing_property(LocalTimeFamily(flat), {0.5, 0.0}, log_spaced(1e-3, 1.0, 8), 0.05, 1);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_TRUE(fit.pass);
    EXPECT_THROW(check_smoothing_property(LocalTimeFamily(flat), {0.5, 0.0}, log_spaced(1e-3, 2.0, 8)), DomainError);
}

TEST(Smoothing, LogLogFit) {
    std::vector<double> t = log_spaced(1e-3, 1.0, 10), v;
    EXPECT_NEAR(t.front(), 1e-3, 1e-15);
    EXPECT_NEAR(t.back(), 1.0, 1e-15);
    for (double s : t) v.push_back(2.0 * std::pow(s, -0.75));
    const auto f = fit_log_log(t, v);
    EXPECT_NEAR(f.slope, -0.75, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 2.0, 1e-10);
    EXPECT_LT(f.max_residual, 1e-10);
}
