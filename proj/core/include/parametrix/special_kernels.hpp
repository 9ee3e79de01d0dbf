#pragma once

// Heat kernel g(ct, y), its first three y-derivatives, Brownian first-passage
// density and survival probability, plus thin wrappers over the libm Gamma
// and error functions.

#include <cmath>

namespace parametrix::kernels {

double gauss(double c, double t, double y);

// i-th derivative in y of gauss(c, t, y), i in {0, 1, 2, 3}.
double hermite(int i, double c, double t, double y);

// Density at time t of the first hitting time of 0 for a standard Brownian
// motion started at `distance` > 0.
double passage_density(double t, double distance);

// P(first hitting of 0 after t) for sigma * W started at `distance` >= 0.
double survival_probability(double t, double distance, double sigma);

double normal_cdf(double x);
// complementary CDF, accurate in the upper tail
double normal_sf(double x);
double normal_quantile(double p);

double gamma(double x);
double log_gamma(double x);

// Fast paths without argument checks, used inside quadrature loops where the
// caller already guarantees c*t > 0. Same formulas as the checked versions.
namespace unchecked {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kUnderflowExponent = -745.0;

// ct is the product c*t (the variance of the kernel).
inline double gauss(double ct, double y) {
    const double e = -0.5 * y * y / ct;
    if (e < kUnderflowExponent) return 0.0;
    return kInvSqrt2Pi / std::sqrt(ct) * std::exp(e);
}
inline double h1(double ct, double y) { return -(y / ct) * gauss(ct, y); }
inline double h2(double ct, double y) {
    const double z = y / ct;
    return (z * z - 1.0 / ct) * gauss(ct, y);
}
inline double h3(double ct, double y) {
    const double z = y / ct;
    return (3.0 * z / ct - z * z * z) * gauss(ct, y);
}

}  // namespace unchecked

}  // namespace parametrix::kernels
