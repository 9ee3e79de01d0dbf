#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace parametrix {

// A point of the bivariate state space: position x and functional value a,
// which is the accumulated local time for one family and the running
// maximum for the other.
struct State {
    double x = 0.0;
    double a = 0.0;
};

// Which part of the two-part reference measure a density value refers to:
// the slice where the functional has not moved (atom), or the region where
// it has (continuous).
enum class Part { Continuous, Atom };

std::string_view to_string(Part p);

struct DensityValue {
    Part part;
    double value;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Descriptor of one piece of a reference or convolution measure.
//   Strip: Lebesgue measure on {level_lo < a' < level_hi, x_lo < x' < x_hi},
//          where x_hi is replaced by a' itself when x_bounded_by_level is set.
//   Slice: Lebesgue measure in x' on (x_lo, x_hi) at a' = level.
// `closed` records whether the x-interval of a slice includes its finite
// endpoints; this only matters on null sets but mirrors the source displays.
struct MeasurePiece {
    enum class Kind { Strip, Slice };
    Kind kind = Kind::Slice;
    std::string_view label;
    double level = 0.0;
    double level_lo = 0.0;
    double level_hi = 0.0;
    double x_lo = -kInf;
    double x_hi = kInf;
    bool x_bounded_by_level = false;
    bool closed = false;

    bool empty() const {
        return kind == Kind::Slice ? !(x_hi > x_lo) : !(level_hi > level_lo);
    }
};

using MeasureRecipe = std::vector<MeasurePiece>;

// Sorted breakpoints of at most kMax entries; used on hot paths instead of
// std::vector to avoid allocation inside nested quadrature.
struct Breaks {
    static constexpr int kMax = 48;
    std::array<double, kMax> v{};
    int n = 0;

    void clear() { n = 0; }
    void add(double p) {
        if (n < kMax) v[n++] = p;
    }
    // Keeps points within [lo, hi], adds the endpoints, sorts and dedupes.
    // Returns false when the interval is empty.
    bool finish(double lo, double hi) {
        if (!(hi > lo)) {
            n = 0;
            return false;
        }
        int m = 0;
        for (int i = 0; i < n; ++i) {
            if (v[i] > lo && v[i] < hi) v[m++] = v[i];
        }
        n = m;
        add(lo);
        add(hi);
        std::sort(v.begin(), v.begin() + n);
        n = static_cast<int>(std::unique(v.begin(), v.begin() + n) - v.begin());
        return n >= 2;
    }
    std::span<const double> span() const { return {v.data(), static_cast<std::size_t>(n)}; }
};

// A truncated, quadrature-ready piece: strips carry their level breakpoints
// and a family tag used to recompute the x-range at each level.
struct QuadPiece {
    bool strip = false;
    int tag = 0;
    double level = 0.0;  // slices
    Breaks level_breaks;  // strips
    Breaks x_breaks;      // slices
};

struct QuadPieces {
    std::array<QuadPiece, 4> items{};
    int n = 0;
    QuadPiece& push() { return items[n++]; }
    std::span<const QuadPiece> span() const { return {items.data(), static_cast<std::size_t>(n)}; }
};

// Context of a convolution step: the source density lives at time s (after
// start z0) and the kernel spans the remaining gap to the target z.
struct ConvolutionQuery {
    State z0;
    State z;
    double s = 0.0;
    double gap = 0.0;
};

}  // namespace parametrix
