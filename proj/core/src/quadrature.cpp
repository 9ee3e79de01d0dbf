#include "parametrix/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace parametrix::quad {

std::vector<double> make_breaks(double lo, double hi, std::initializer_list<double> interior) {
    std::vector<double> out;
    out.reserve(interior.size() + 2);
    out.push_back(lo);
    for (double v : interior) {
        if (v > lo && v < hi) out.push_back(v);
    }
    out.push_back(hi);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Rule gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    std::lock_guard lock(mu);
    cache.emplace(n, r);
    return r;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
    std::vector<double> w(nodes.size(), 1.0);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (k != j) w[j] /= (nodes[j] - nodes[k]);
        }
    }
    return w;
}

void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x, std::span<double> out) {
    double denom = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double d = x - nodes[j];
        if (d == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = bary[j] / d;
        denom += out[j];
    }
    for (auto& v : out) v /= denom;
}

}  // namespace parametrix::quad
