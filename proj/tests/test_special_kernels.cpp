#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/quadrature.hpp"
#include "parametrix/special_kernels.hpp"

using namespace parametrix;

// Values frozen from a 30-digit evaluation of the closed forms.
constexpr double kG10 = 0.398942280401432677940;   // 1/sqrt(2 pi)
constexpr double kG11 = 0.241970724519143349798;   // e^{-1/2}/sqrt(2 pi)
constexpr double kPassage12 = 0.107981933026376103901;
constexpr double kErf1 = 0.682689492137085897170;  // 2 Phi(1) - 1
constexpr double kErf3 = 0.997300203936739810947;  // 2 Phi(3) - 1

TEST(HeatKernel, ReferenceValues) {
    EXPECT_NEAR(kernels::gauss(1, 1, 0), kG10, 1e-15);
    EXPECT_NEAR(kernels::gauss(1, 1, 1), kG11, 1e-15);
    EXPECT_NEAR(kernels::gauss(4, 1, 0), kG10 / 2, 1e-15);
    EXPECT_NEAR(kernels::gauss(1, 4, 0), kernels::gauss(4, 1, 0), 0.0);
}

TEST(HeatKernel, HermiteMatchesDerivatives) {
    EXPECT_EQ(kernels::hermite(1, 1, 1, 0), 0.0);
    EXPECT_NEAR(kernels::hermite(0, 1, 1, 0), kG10, 1e-15);
    EXPECT_NEAR(kernels::hermite(2, 1, 1, 0), -kG10, 1e-15);
    // Richardson-extrapolated central differences of the next lower order.
    for (int i = 1; i <= 3; ++i) {
        for (double y : {-1.3, 0.2, 0.9, 2.5}) {
            auto lower = [&](double yy) { return kernels::hermite(i - 1, 0.7, 1.3, yy); };
            auto cd = [&](double h) { return (lower(y + h) - lower(y - h)) / (2 * h); };
            const double d = (4 * cd(1e-3) - cd(2e-3)) / 3;
            EXPECT_NEAR(kernels::hermite(i, 0.7, 1.3, y), d, 1e-8) << "order " << i << " at " << y;
        }
    }
}

TEST(HeatKernel, UncheckedAgreesWithChecked) {
    namespace u = kernels::unchecked;
    for (double y : {-3.0, -0.4, 0.0, 1.1}) {
        EXPECT_DOUBLE_EQ(u::gauss(0.6, y), kernels::gauss(0.3, 2.0, y));
        EXPECT_DOUBLE_EQ(u::h1(0.6, y), kernels::hermite(1, 0.3, 2.0, y));
        EXPECT_DOUBLE_EQ(u::h2(0.6, y), kernels::hermite(2, 0.3, 2.0, y));
        EXPECT_DOUBLE_EQ(u::h3(0.6, y), kernels::hermite(3, 0.3, 2.0, y));
        EXPECT_NEAR(u::h3(0.6, y), oracle::H(3, 0.6, y), 1e-14);
    }
    EXPECT_EQ(u::gauss(1e-300, 1.0), 0.0);
}

TEST(HeatKernel, DomainErrors) {
    EXPECT_THROW(kernels::gauss(0, 1, 0), DomainError);
    EXPECT_THROW(kernels::gauss(1, -1, 0), DomainError);
    EXPECT_THROW(kernels::hermite(4, 1, 1, 0), UnsupportedOrderError);
    EXPECT_THROW(kernels::passage_density(1, -1), DomainError);
}

TEST(PassageTime, DensityAndSurvival) {
    EXPECT_NEAR(kernels::passage_density(1, 1), kG11, 1e-15);
    EXPECT_NEAR(kernels::passage_density(1, 2), kPassage12, 1e-15);
    EXPECT_LT(kernels::passage_density(1e8, 1), 1e-11);
    EXPECT_NEAR(kernels::survival_probability(1, 1, 1), kErf1, 1e-15);
    EXPECT_EQ(kernels::survival_probability(1, 0, 1), 0.0);
    EXPECT_NEAR(kernels::survival_probability(1, 3, 1), kErf3, 1e-15);
    // survival = 1 - integral of the passage density
    const auto e = quad::integrate([](double s) { return kernels::passage_density(s, 0.8); }, 0.0, 2.0,
                                   quad::Options{1e-12, 1e-15, 200});
    EXPECT_NEAR(1.0 - e.value, kernels::survival_probability(2.0, 0.8, 1.0), 1e-11);
}

TEST(NormalHelpers, QuantileInvertsCdf) {
    for (double p : {1e-12, 1e-5, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9}) {
        const double x = kernels::normal_quantile(p);
        EXPECT_NEAR(kernels::normal_cdf(x), p, 1e-14 + 1e-12 * p);
    }
    EXPECT_NEAR(kernels::normal_sf(8.0), 0.5 * std::erfc(8.0 / std::sqrt(2.0)), 1e-28);
    EXPECT_NEAR(kernels::gamma(0.5), std::sqrt(oracle::kPi), 1e-14);
}

TEST(Quadrature, GaussKronrodPanels) {
    const auto e = quad::integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0);
    EXPECT_NEAR(e.value, std::sqrt(oracle::kPi), 1e-12);
    EXPECT_TRUE(e.converged);
    // sqrt endpoint singularity converges through subdivision
    const auto r = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                                   quad::Options{1e-8, 0.0, 400});
    EXPECT_NEAR(r.value, 2.0, 1e-6);
}
