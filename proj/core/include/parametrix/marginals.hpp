#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "parametrix/mc_oracle.hpp"
#include "parametrix/parallel.hpp"
#include "parametrix/parametrix_engine.hpp"

namespace parametrix {

// Grid on which the truncated series is integrated for comparison with
// samples. Ranges are in units of rho = sqrt(a_sup T) around the start.
struct MarginalGrid {
    int x_points = 241;
    int level_points = 121;
    int cell_x = 8;
    int cell_level = 6;
    double span = 7.0;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

}  // namespace detail

// Integrates orders 0..N of the expansion over the pieces needed by
// compare_to_density. Tables are built first; the cell integrals then run
// in parallel into fixed slots.
template <ProxyFamily F>
DensityMarginals integrate_marginals(Expansion<F>& ex, int N, const MarginalGrid& g = {}) {
    ex.prepare(N);
    const State z0 = ex.start();
    const double rho = std::sqrt(ex.family().field().a_sup() * ex.horizon());
    const bool max_family = std::string_view(F::kName) == "max";
    const double x_lo = z0.x - g.span * rho;
    const double x_hi = (max_family ? std::max(z0.x, z0.a) : z0.x) + g.span * rho;
    const double l_lo = z0.a;
    const double l_hi = z0.a + g.span * rho;

    DensityMarginals dm;
    dm.x_grid = detail::linspace(x_lo, x_hi, g.x_points);
    dm.level_grid = detail::linspace(l_lo, l_hi, g.level_points);
    dm.cell_x_edges = detail::linspace(z0.x - 3.0 * rho, (max_family ? z0.a : z0.x) + 3.0 * rho, g.cell_x + 1);
    dm.cell_level_edges = detail::linspace(l_lo, z0.a + 3.0 * rho, g.cell_level + 1);

    // Work items: x cells (with the two tails), level cells, 2-D cells, atom
    // cells, and the atom and total masses.
    std::vector<Region> regions;
    const std::size_t nxc = dm.x_grid.size() - 1, nlc = dm.level_grid.size() - 1;
    const std::size_t hx = dm.cell_x_edges.size() - 1, hl = dm.cell_level_edges.size() - 1;
    regions.push_back({Region::Parts::all, -kInf, x_lo, -kInf, kInf});
    for (std::size_t i = 0; i < nxc; ++i) regions.push_back({Region::Parts::all, dm.x_grid[i], dm.x_grid[i + 1], -kInf, kInf});
    for (std::size_t j = 0; j < nlc; ++j) {
        regions.push_back({Region::Parts::continuous, -kInf, kInf, dm.level_grid[j], dm.level_grid[j + 1]});
    }
    for (std::size_t i = 0; i < hx; ++i) {
        for (std::size_t j = 0; j < hl; ++j) {
            regions.push_back({Region::Parts::continuous, dm.cell_x_edges[i], dm.cell_x_edges[i + 1],
                               dm.cell_level_edges[j], dm.cell_level_edges[j + 1]});
        }
    }
    for (std::size_t i = 0; i < hx; ++i) {
        regions.push_back({Region::Parts::atom, dm.cell_x_edges[i], dm.cell_x_edges[i + 1], -kInf, kInf});
    }
    regions.push_back({Region::Parts::atom, -kInf, kInf, -kInf, kInf});
    regions.push_back({Region::Parts::all, -kInf, kInf, -kInf, kInf});

    std::vector<quad::Estimate> vals(regions.size());
    parallel_for(regions.size(), ex.threads(), [&](std::size_t i) { vals[i] = ex.integrate_series(N, regions[i]); });

    std::size_t k = 0;
    dm.x_cdf.resize(dm.x_grid.size());
    dm.x_cdf[0] = vals[k++].value;
    for (std::size_t i = 0; i < nxc; ++i) dm.x_cdf[i + 1] = dm.x_cdf[i] + vals[k++].value;
    dm.level_cdf.resize(dm.level_grid.size());
    dm.level_cdf[0] = 0.0;
    for (std::size_t j = 0; j < nlc; ++j) dm.level_cdf[j + 1] = dm.level_cdf[j] + vals[k++].value;
    for (std::size_t c = 0; c < hx * hl; ++c) dm.cell_probability.push_back(vals[k++].value);
    for (std::size_t c = 0; c < hx; ++c) dm.atom_cell_probability.push_back(vals[k++].value);
    dm.atom_mass = vals[k].value;
    dm.atom_error = vals[k++].error;
    dm.total_mass = vals[k++].value;
    dm.remainder_bound = ex.remainder_bound(N);
    return dm;
}

}  // namespace parametrix
