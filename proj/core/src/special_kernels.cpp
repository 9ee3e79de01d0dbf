#include "parametrix/special_kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "parametrix/errors.hpp"

namespace parametrix::kernels {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be positive and finite, got " + std::to_string(v));
    }
}

}  // namespace

double gauss(double c, double t, double y) {
    require_positive(c, "variance scale c");
    require_positive(t, "time t");
    return unchecked::gauss(c * t, y);
}

double hermite(int i, double c, double t, double y) {
    require_positive(c, "variance scale c");
    require_positive(t, "time t");
    const double ct = c * t;
    switch (i) {
        case 0: return unchecked::gauss(ct, y);
        case 1: return unchecked::h1(ct, y);
        case 2: return unchecked::h2(ct, y);
        case 3: return unchecked::h3(ct, y);
        default:
            throw UnsupportedOrderError("Hermite order " + std::to_string(i) + " not supported (0..3)");
    }
}

double passage_density(double t, double distance) {
    require_positive(t, "time t");
    require_positive(distance, "distance");
    return distance / t * unchecked::gauss(t, distance);
}

double survival_probability(double t, double distance, double sigma) {
    require_positive(t, "time t");
    require_positive(sigma, "sigma");
    if (!(distance >= 0.0)) throw DomainError("distance must be nonnegative");
    // 2 Phi(z) - 1 = erf(z / sqrt 2)
    return std::erf(distance / (sigma * std::sqrt(2.0 * t)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("normal_quantile needs p in [0,1]");
    }
    // Acklam's rational approximation followed by two Halley steps on erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int iter = 0; iter < 2; ++iter) {
        // residual computed on the smaller tail to keep relative accuracy
        const double e = (x < 0.0) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
        const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double gamma(double x) { return std::tgamma(x); }

double log_gamma(double x) { return std::lgamma(x); }

}  // namespace parametrix::kernels
