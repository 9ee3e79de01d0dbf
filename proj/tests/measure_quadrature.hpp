#pragma once

// Brute-force integration over a measure recipe, truncated to a box. Used
// by the tests to check normalization and measure identities without the
// engine's own piece bookkeeping.

#include <algorithm>
#include <cmath>
#include <vector>

#include "parametrix/measure.hpp"
#include "parametrix/quadrature.hpp"

namespace testing_support {

using parametrix::MeasurePiece;
using parametrix::MeasureRecipe;
using parametrix::State;

struct Box {
    double x_lo = -8.0, x_hi = 8.0;
    double level_span = 8.0;  // levels beyond the lower limit + span are dropped
    std::vector<double> x_breaks{0.0};
    double rel = 1e-10;
    double abs = 1e-14;
};

template <class F>
double integrate_recipe(const MeasureRecipe& recipe, const F& f, const Box& box) {
    namespace quad = parametrix::quad;
    const quad::Options opt{box.rel, box.abs, 400};
    auto x_integral = [&](double lo, double hi, double level) -> quad::Estimate {
        lo = std::max(lo, box.x_lo);
        hi = std::min(hi, box.x_hi);
        if (!(hi > lo)) return {};
        std::vector<double> b{lo};
        for (double v : box.x_breaks) {
            if (v > lo && v < hi) b.push_back(v);
        }
        b.push_back(hi);
        std::sort(b.begin(), b.end());
        return quad::integrate([&](double x) { return f(State{x, level}); }, std::span<const double>(b), opt);
    };
    double total = 0.0;
    for (const MeasurePiece& p : recipe) {
        if (p.empty()) continue;
        if (p.kind == MeasurePiece::Kind::Slice) {
            total += x_integral(p.x_lo, p.x_hi, p.level).value;
            continue;
        }
        const double l_hi = std::min(p.level_hi, p.level_lo + box.level_span);
        std::vector<double> lb{p.level_lo};
        for (double v : box.x_breaks) {
            if (p.x_bounded_by_level && v > p.level_lo && v < l_hi) lb.push_back(v);
        }
        lb.push_back(l_hi);
        std::sort(lb.begin(), lb.end());
        total += quad::integrate(
                     [&](double level) {
                         return x_integral(p.x_lo, p.x_bounded_by_level ? level : p.x_hi, level);
                     },
                     std::span<const double>(lb), opt)
                     .value;
    }
    return total;
}

}  // namespace testing_support
