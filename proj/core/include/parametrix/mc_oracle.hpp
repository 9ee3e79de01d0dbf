#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "parametrix/coefficient_field.hpp"
#include "parametrix/measure.hpp"

namespace parametrix {

enum class Functional { local_time, running_max };
enum class Scheme { proxy_step, euler_tanaka, euler_bridge_max };

std::string_view to_string(Functional f);
std::string_view to_string(Scheme s);
Functional functional_from_string(std::string_view s);
Scheme scheme_from_string(std::string_view s);

struct SimulationPlan {
    Functional family = Functional::local_time;
    CoefficientField field;
    double T = 1.0;
    int steps = 1;
    std::int64_t paths = 1;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::proxy_step;
    // Upper limit on steps * paths.
    double budget = 1e10;
    int threads = 0;
    bool keep_samples = true;
};

struct PathSample {
    double x_T;
    double a_T;
    bool atom;
};

struct SampleSummary {
    std::int64_t paths = 0;
    std::int64_t atoms = 0;
    double atom_fraction = 0.0;
    double atom_se = 0.0;
    double mean_x = 0.0, sd_x = 0.0, se_x = 0.0;
    double mean_a = 0.0, sd_a = 0.0, se_a = 0.0;
};

struct SimulationResult {
    std::vector<PathSample> samples;  // empty unless plan.keep_samples
    SampleSummary summary;
};

// One increment of the frozen proxy law at state z over time dt, driven by
// the uniforms u[0..3]. Exposed for tests; `simulate` calls it per step.
State proxy_step_lt(State z, double sigma, double dt, const double* u);
State proxy_step_max(State z, double sigma, double dt, const double* u);

// Paths are independent: path p at step k reads the counter-based stream at
// (seed, p, k, slot), so results do not depend on the worker count.
SimulationResult simulate(const SimulationPlan& plan, State start);

// Fixed-order pairwise sum.
double pairwise_sum(const double* v, std::size_t n);

void write_samples_csv(std::ostream& os, const std::vector<PathSample>& samples);
std::string summary_json(const SimulationPlan& plan, State start, const SampleSummary& s);

// Same statistic from two step counts: the bias allowance assumes an
// O(sqrt(dt)) weak rate, the slowest plausible for the local-time schemes.
double halving_bias_allowance(double coarse, double fine);

// Parametrix-side quantities at the horizon, integrated against the
// reference measure.
struct DensityMarginals {
    double atom_mass = 0.0;
    double atom_error = 0.0;  // quadrature error estimate
    double total_mass = 0.0;
    double remainder_bound = 0.0;
    // P(X_T <= x_grid[i]), all parts together; x_grid covers the support.
    std::vector<double> x_grid;
    std::vector<double> x_cdf;
    // P(A_T <= level_grid[i], off the atom).
    std::vector<double> level_grid;
    std::vector<double> level_cdf;
    // Off-atom histogram cells, row-major in (x, level), plus atom cells in x.
    std::vector<double> cell_x_edges;
    std::vector<double> cell_level_edges;
    std::vector<double> cell_probability;
    std::vector<double> atom_cell_probability;
};

struct ComparisonTolerances {
    double atom_sigmas = 3.0;
    double ks_factor = 1.5;             // multiple of the 1% KS critical value
    double cell_z = 4.5;
    double min_cell_expectation = 25.0;  // cells below this are not scored
    double coverage = 1e-6;              // admissible fraction of mass outside the grid
    double bias_allowance = 0.0;         // added to the atom standard error
};

struct ComparisonReport {
    double atom_mc = 0.0;
    double atom_density = 0.0;
    double atom_discrepancy = 0.0;
    double atom_combined_se = 0.0;
    double atom_z = 0.0;
    bool atom_pass = false;
    double ks_x = 0.0;
    double ks_level = 0.0;
    double ks_threshold_x = 0.0;
    double ks_threshold_level = 0.0;
    bool ks_x_pass = false;
    bool ks_level_pass = false;
    double max_cell_z = 0.0;
    int scored_cells = 0;
    bool cells_pass = false;
    bool pass() const { return atom_pass && ks_x_pass && ks_level_pass && cells_pass; }
};

// 1% critical value of the one-sample KS statistic, asymptotic form.
double ks_critical_1pct(std::int64_t n);

// Kolmogorov-Smirnov distance between the empirical CDF of `values` and a
// CDF given on an increasing grid, scaled by `mass` (the CDF is divided by
// it), with linear interpolation between grid points.
double ks_distance(std::vector<double> values, const std::vector<double>& grid, const std::vector<double>& cdf,
                   double mass);

ComparisonReport compare_to_density(const std::vector<PathSample>& samples, const DensityMarginals& density,
                                    const ComparisonTolerances& tol = {});

std::string report_json(const ComparisonReport& r);

}  // namespace parametrix
