#include "parametrix/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "parametrix/errors.hpp"
#include "parametrix/parallel.hpp"
#include "parametrix/philox.hpp"
#include "parametrix/special_kernels.hpp"

namespace parametrix {

std::string_view to_string(Functional f) { return f == Functional::local_time ? "local-time" : "max"; }

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::proxy_step: return "proxy_step";
        case Scheme::euler_tanaka: return "euler_tanaka";
        case Scheme::euler_bridge_max: return "euler_bridge_max";
    }
    return "?";
}

Functional functional_from_string(std::string_view s) {
    if (s == "local-time" || s == "local_time") return Functional::local_time;
    if (s == "max" || s == "running_max" || s == "running-max") return Functional::running_max;
    throw DomainError("unknown family '" + std::string(s) + "' (expected local-time or max)");
}

Scheme scheme_from_string(std::string_view s) {
    if (s == "proxy_step") return Scheme::proxy_step;
    if (s == "euler_tanaka") return Scheme::euler_tanaka;
    if (s == "euler_bridge_max") return Scheme::euler_bridge_max;
    throw DomainError("unknown scheme '" + std::string(s) + "'");
}

namespace {

constexpr double kTwoPi = 6.283185307179586;

double box_muller(double u0, double u1) { return std::sqrt(-2.0 * std::log(u0)) * std::cos(kTwoPi * u1); }

// Maximum over [0, dt] of a Brownian bridge from 0 to y with variance rate
// var, by inverting its conditional law.
double bridge_max(double y, double var_dt, double u) {
    return 0.5 * (y + std::sqrt(y * y - 2.0 * var_dt * std::log(u)));
}

// Position of a path killed at the level m, started at distance delta = d/s
// below it (units of s = sigma sqrt(dt)): solves
// Phi(delta - w) - Phi(-delta - w) = p for w = (m - y)/s >= 0.
double killed_position_offset(double delta, double p) {
    auto G = [&](double w) { return kernels::normal_cdf(delta - w) - kernels::normal_cdf(-delta - w); };
    double lo = 0.0;
    double hi = std::max(1.0, delta - kernels::normal_quantile(p) + 1.0);
    while (G(hi) > p) hi *= 2.0;
    double w = std::clamp(delta - kernels::normal_quantile(std::min(p, 0.5)), lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double g = G(w) - p;
        if (g > 0.0) lo = w; else hi = w;
        const double dg = -(std::exp(-0.5 * (delta - w) * (delta - w)) - std::exp(-0.5 * (delta + w) * (delta + w))) /
                          std::sqrt(kTwoPi);
        double next = dg < 0.0 ? w - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - w) <= 1e-14 * std::max(1.0, w) || hi - lo <= 1e-14 * std::max(1.0, hi)) return next;
        w = next;
    }
    return w;
}

}  // namespace

State proxy_step_lt(State z, double sigma, double dt, const double* u) {
    // Skorokhod form of the frozen reflected motion: |X| = |x| + B + L with
    // L = max(0, sup(-B) - |x|) the symmetric local time at zero. Given an
    // excursion through zero the sign of the endpoint is a fair coin.
    const double b = sigma * std::sqrt(dt) * box_muller(u[0], u[1]);
    const double sup_neg = bridge_max(-b, sigma * sigma * dt, u[2]);
    const double l = std::max(0.0, sup_neg - std::abs(z.x));
    const double r = std::max(0.0, std::abs(z.x) + b + l);
    double sign;
    if (l == 0.0) {
        sign = z.x > 0.0 ? 1.0 : -1.0;
    } else {
        sign = u[3] < 0.5 ? 1.0 : -1.0;
    }
    return {sign * r, z.a + l};
}

State proxy_step_max(State z, double sigma, double dt, const double* u) {
    const double s = sigma * std::sqrt(dt);
    const double d = z.a - z.x;
    const double surv = std::erf(d / (s * std::sqrt(2.0)));
    if (u[0] < surv) {
        // Atom: the maximum stays put; the position follows the killed law,
        // whose CDF at the level equals surv, so u[0] is already uniform on
        // the right range.
        const double w = killed_position_offset(d / s, u[0]);
        return {std::min(z.a, z.a - s * w), z.a};
    }
    // P(M > m') = 2 Phi_bar((m' - x)/s); 1 - u[0] is uniform on (0, 1 - surv].
    const double q = -kernels::normal_quantile(0.5 * (1.0 - u[0]));
    const double m_new = std::max(z.a, z.x + s * q);
    const double rise = m_new - z.x;
    const double r = std::sqrt(rise * rise - 2.0 * s * s * std::log(u[1]));
    return {std::min(m_new, 2.0 * m_new - z.x - r), m_new};
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

SimulationResult simulate(const SimulationPlan& plan, State start) {
    if (!(plan.T > 0.0) || !std::isfinite(plan.T)) throw DomainError("simulation horizon must be positive");
    if (plan.steps < 1) throw DomainError("steps must be at least 1");
    if (plan.paths < 1) throw DomainError("paths must be at least 1");
    if (static_cast<double>(plan.steps) * static_cast<double>(plan.paths) > plan.budget) {
        throw BudgetError("steps * paths = " + std::to_string(static_cast<double>(plan.steps) * plan.paths) +
                          " exceeds the simulation budget");
    }
    const bool lt = plan.family == Functional::local_time;
    if (plan.scheme == Scheme::euler_tanaka && !lt) throw DomainError("euler_tanaka applies to the local-time family");
    if (plan.scheme == Scheme::euler_bridge_max && lt) throw DomainError("euler_bridge_max applies to the max family");
    if (plan.scheme == Scheme::proxy_step && !plan.field.driftless()) {
        throw DomainError("proxy_step samples the driftless frozen law; use the family's Euler scheme with drift");
    }
    if (lt) {
        if (start.a < 0.0) throw DomainError("local time must be nonnegative");
    } else if (start.x > start.a) {
        throw DomainError("start state violates x0 <= m0");
    }

    const CoefficientField& field = plan.field;
    const CounterRng rng(plan.seed);
    const double dt = plan.T / plan.steps;
    const double sq = std::sqrt(dt);
    const auto n = static_cast<std::size_t>(plan.paths);
    std::vector<PathSample> out(n);

    constexpr std::size_t kChunk = 1024;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, resolve_threads(plan.threads), [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t p = c * kChunk; p < end; ++p) {
            State z = start;
            for (int k = 0; k < plan.steps; ++k) {
                const auto step = static_cast<std::uint32_t>(k);
                const auto u01 = rng.uniforms(p, step, 0);
                const auto u23 = rng.uniforms(p, step, 1);
                const double u[4] = {u01.u[0], u01.u[1], u23.u[0], u23.u[1]};
                const double sigma = std::sqrt(field.a(z.x, z.a));
                switch (plan.scheme) {
                    case Scheme::proxy_step:
                        z = lt ? proxy_step_lt(z, sigma, dt, u) : proxy_step_max(z, sigma, dt, u);
                        break;
                    case Scheme::euler_tanaka: {
                        const double dx = field.b(z.x, z.a) * dt + sigma * sq * box_muller(u[0], u[1]);
                        const double xn = z.x + dx;
                        const double sgn = z.x > 0.0 ? 1.0 : (z.x < 0.0 ? -1.0 : 0.0);
                        z.a += std::max(0.0, std::abs(xn) - std::abs(z.x) - sgn * dx);
                        z.x = xn;
                        break;
                    }
                    case Scheme::euler_bridge_max: {
                        const double xn = z.x + field.b(z.x, z.a) * dt + sigma * sq * box_muller(u[0], u[1]);
                        const double top = z.x + bridge_max(xn - z.x, sigma * sigma * dt, u[2]);
                        z.a = std::max(z.a, top);
                        z.x = xn;
                        break;
                    }
                }
            }
            out[p] = PathSample{z.x, z.a, z.a == start.a};
        }
    });

    SimulationResult res;
    SampleSummary& s = res.summary;
    s.paths = plan.paths;
    std::vector<double> buf(n);
    auto mean_sd = [&](auto get, double& mean, double& sd, double& se) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = get(out[i]);
        mean = pairwise_sum(buf.data(), n) / n;
        for (std::size_t i = 0; i < n; ++i) buf[i] = (get(out[i]) - mean) * (get(out[i]) - mean);
        sd = n > 1 ? std::sqrt(pairwise_sum(buf.data(), n) / (n - 1)) : 0.0;
        se = sd / std::sqrt(static_cast<double>(n));
    };
    mean_sd([](const PathSample& p) { return p.x_T; }, s.mean_x, s.sd_x, s.se_x);
    mean_sd([](const PathSample& p) { return p.a_T; }, s.mean_a, s.sd_a, s.se_a);
    for (const auto& p : out) s.atoms += p.atom;
    s.atom_fraction = static_cast<double>(s.atoms) / n;
    s.atom_se = std::sqrt(s.atom_fraction * (1.0 - s.atom_fraction) / n);
    if (plan.keep_samples) res.samples = std::move(out);
    return res;
}

void write_samples_csv(std::ostream& os, const std::vector<PathSample>& samples) {
    os << "x_T,a_T,atom\n";
    char line[96];
    for (const auto& p : samples) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%d\n", p.x_T, p.a_T, p.atom ? 1 : 0);
        os << line;
    }
}

std::string summary_json(const SimulationPlan& plan, State start, const SampleSummary& s) {
    nlohmann::ordered_json j;
    j["family"] = to_string(plan.family);
    j["scheme"] = to_string(plan.scheme);
    j["T"] = plan.T;
    j["steps"] = plan.steps;
    j["paths"] = s.paths;
    j["seed"] = plan.seed;
    j["start"] = {start.x, start.a};
    j["atoms"] = s.atoms;
    j["atom_fraction"] = s.atom_fraction;
    j["atom_se"] = s.atom_se;
    j["mean_x"] = s.mean_x;
    j["sd_x"] = s.sd_x;
    j["se_x"] = s.se_x;
    j["mean_a"] = s.mean_a;
    j["sd_a"] = s.sd_a;
    j["se_a"] = s.se_a;
    return j.dump(2);
}

double halving_bias_allowance(double coarse, double fine) { return std::abs(coarse - fine) / (std::sqrt(2.0) - 1.0); }

double ks_critical_1pct(std::int64_t n) {
    if (n < 1) throw CoverageError("KS critical value needs at least one sample");
    return 1.63 / std::sqrt(static_cast<double>(n));
}

double ks_distance(std::vector<double> values, const std::vector<double>& grid, const std::vector<double>& cdf,
                   double mass) {
    if (values.empty()) throw CoverageError("no samples for the KS distance");
    if (grid.size() < 2 || grid.size() != cdf.size()) throw DomainError("CDF grid must have matching sizes >= 2");
    if (!(mass > 0.0)) throw CoverageError("CDF grid carries no mass");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        double F;
        if (v <= grid.front()) {
            F = cdf.front();
        } else if (v >= grid.back()) {
            F = cdf.back();
        } else {
            while (grid[k + 1] < v) ++k;
            const double w = (v - grid[k]) / (grid[k + 1] - grid[k]);
            F = cdf[k] + w * (cdf[k + 1] - cdf[k]);
        }
        F /= mass;
        d = std::max({d, F - i / n, (i + 1) / n - F});
    }
    return d;
}

namespace {

std::size_t cell_index(const std::vector<double>& edges, double v) {
    if (v < edges.front() || v >= edges.back()) return edges.size();
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
}

}  // namespace

ComparisonReport compare_to_density(const std::vector<PathSample>& samples, const DensityMarginals& dm,
                                    const ComparisonTolerances& tol) {
    if (samples.empty()) throw CoverageError("no samples to compare (zero paths)");
    if (dm.x_grid.size() < 2 || dm.level_grid.size() < 2) throw CoverageError("density grid is empty");
    const double below = dm.x_cdf.front();
    const double above = dm.total_mass - dm.x_cdf.back();
    if (below > tol.coverage || above > tol.coverage) {
        throw CoverageError("density grid misses " + std::to_string(below + above) + " of the mass");
    }
    ComparisonReport r;
    const double n = static_cast<double>(samples.size());
    std::int64_t atoms = 0;
    std::vector<double> xs, off_levels;
    xs.reserve(samples.size());
    for (const auto& p : samples) {
        xs.push_back(p.x_T);
        if (p.atom) ++atoms; else off_levels.push_back(p.a_T);
    }
    r.atom_mc = atoms / n;
    r.atom_density = dm.atom_mass;
    r.atom_discrepancy = std::abs(r.atom_mc - r.atom_density);
    const double se_mc = std::sqrt(r.atom_mc * (1.0 - r.atom_mc) / n);
    r.atom_combined_se = std::sqrt(se_mc * se_mc + dm.atom_error * dm.atom_error + tol.bias_allowance * tol.bias_allowance);
    r.atom_z = r.atom_combined_se > 0.0 ? r.atom_discrepancy / r.atom_combined_se : (r.atom_discrepancy > 0 ? kInf : 0.0);
    r.atom_pass = r.atom_discrepancy <= tol.atom_sigmas * r.atom_combined_se;

    r.ks_x = ks_distance(xs, dm.x_grid, dm.x_cdf, dm.total_mass);
    r.ks_threshold_x = tol.ks_factor * ks_critical_1pct(static_cast<std::int64_t>(xs.size()));
    r.ks_x_pass = r.ks_x < r.ks_threshold_x;
    if (off_levels.empty()) {
        r.ks_level_pass = true;
    } else {
        r.ks_level = ks_distance(off_levels, dm.level_grid, dm.level_cdf, dm.level_cdf.back());
        r.ks_threshold_level = tol.ks_factor * ks_critical_1pct(static_cast<std::int64_t>(off_levels.size()));
        r.ks_level_pass = r.ks_level < r.ks_threshold_level;
    }

    const std::size_t nx = dm.cell_x_edges.size() > 1 ? dm.cell_x_edges.size() - 1 : 0;
    const std::size_t nl = dm.cell_level_edges.size() > 1 ? dm.cell_level_edges.size() - 1 : 0;
    std::vector<double> counts(nx * nl, 0.0), atom_counts(nx, 0.0);
    for (const auto& p : samples) {
        const std::size_t i = cell_index(dm.cell_x_edges, p.x_T);
        if (i >= nx) continue;
        if (p.atom) {
            atom_counts[i] += 1.0;
        } else {
            const std::size_t j = cell_index(dm.cell_level_edges, p.a_T);
            if (j < nl) counts[i * nl + j] += 1.0;
        }
    }
    auto score = [&](double count, double prob) {
        const double e = n * prob;
        if (e < tol.min_cell_expectation || prob >= 1.0) return;
        const double z = (count - e) / std::sqrt(e * (1.0 - prob));
        r.max_cell_z = std::max(r.max_cell_z, std::abs(z));
        ++r.scored_cells;
    };
    for (std::size_t c = 0; c < counts.size() && c < dm.cell_probability.size(); ++c) score(counts[c], dm.cell_probability[c]);
    for (std::size_t c = 0; c < nx && c < dm.atom_cell_probability.size(); ++c) score(atom_counts[c], dm.atom_cell_probability[c]);
    r.cells_pass = r.max_cell_z <= tol.cell_z;
    return r;
}

std::string report_json(const ComparisonReport& r) {
    nlohmann::ordered_json j;
    j["atom"] = {{"mc", r.atom_mc},
                 {"density", r.atom_density},
                 {"discrepancy", r.atom_discrepancy},
                 {"combined_se", r.atom_combined_se},
                 {"z", r.atom_z},
                 {"pass", r.atom_pass}};
    j["ks_x"] = {{"distance", r.ks_x}, {"threshold", r.ks_threshold_x}, {"pass", r.ks_x_pass}};
    j["ks_level_off_atom"] = {{"distance", r.ks_level}, {"threshold", r.ks_threshold_level}, {"pass", r.ks_level_pass}};
    j["cells"] = {{"max_abs_z", r.max_cell_z}, {"scored", r.scored_cells}, {"pass", r.cells_pass}};
    j["pass"] = r.pass();
    return j.dump(2);
}

}  // namespace parametrix
