// parametrix: command-line front end for the series engine, the Monte Carlo
// oracle and the diagnostic checks. Results go to CSV (grids) and JSON
// (reports); a short summary goes to stdout.
//
// Exit status: 0 success or pass, 2 a check failed, 1 usage, domain or
// parse error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parametrix/coefficient_field.hpp"
#include "parametrix/diagnostics.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/local_time_family.hpp"
#include "parametrix/marginals.hpp"
#include "parametrix/mc_oracle.hpp"
#include "parametrix/parametrix_engine.hpp"
#include "parametrix/running_max_family.hpp"

namespace {

using namespace parametrix;
using json = nlohmann::ordered_json;

constexpr int kExitCheckFailed = 2;
constexpr int kExitError = 1;

struct RunConfig {
    std::string family = "local-time";
    std::string coeff;
    double T = 1.0;
    std::string start = "1,0";
    std::string grid = "auto";
    double tol = 1e-3;
    int orders = -1;  // < 0: choose from tol
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out = "parametrix_out";
    bool with_drift = false;

    // mc-validate
    double paths = 1e5;
    int steps = 1;
    std::string scheme = "proxy_step";
    bool write_samples = false;

    // smoothing-check
    double t_min = 1e-3;
    double t_max = 1.0;
    int t_points = 12;
    double slack = 0.05;

    // bounds-check
    int nx = 21;
    int nlevel = 21;
    double span = 4.0;
    double corruption = 1.0;

    // lemma-check
    std::string lemma = "all";
};

Functional parse_family(const std::string& s) {
    if (s == "local-time" || s == "local_time" || s == "lt") return Functional::local_time;
    if (s == "max" || s == "running-max" || s == "running_max") return Functional::running_max;
    throw DomainError("unknown family '" + s + "' (expected local-time or max)");
}

State parse_state(const std::string& s) {
    std::istringstream in(s);
    State z;
    char comma = 0;
    if (!(in >> z.x >> comma >> z.a) || comma != ',' || !(in >> std::ws).eof()) {
        throw DomainError("start state must be 'x,a', got '" + s + "'");
    }
    return z;
}

CoefficientField load_field(const RunConfig& c) {
    if (c.coeff.empty()) return build_field(constant_spec());
    return build_field(load_coefficient_spec(c.coeff));
}

EngineOptions engine_options(const RunConfig& c) {
    EngineOptions o;
    o.threads = c.threads;
    return o;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path + "'");
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

// Calls fn with the family object selected by the config.
template <class Fn>
auto with_family(const RunConfig& c, const CoefficientField& field, Fn&& fn) {
    if (parse_family(c.family) == Functional::local_time) {
        const auto v = c.with_drift ? LocalTimeFamily::KernelVariant::with_drift
                                    : LocalTimeFamily::KernelVariant::driftless;
        return fn(LocalTimeFamily(field, v));
    }
    if (c.with_drift) throw DomainError("--with-drift applies to the local-time family only");
    return fn(RunningMaxFamily(field));
}

template <class Ex>
int choose_orders(const RunConfig& c, Ex& ex) {
    if (c.orders >= 0) {
        if (c.orders > ex.options().n_max) throw UnsupportedOrderError("--orders exceeds the supported maximum");
        return c.orders;
    }
    int N = 0;
    while (N < ex.options().n_max && !(ex.remainder_bound(N) < c.tol)) ++N;
    return N;
}

// ---------------------------------------------------------------- density

int run_density(const RunConfig& c) {
    const auto field = load_field(c);
    const State z0 = parse_state(c.start);
    return with_family(c, field, [&](auto fam) {
        using F = decltype(fam);
        const bool max_family = std::string_view(F::kName) == "max";
        Expansion<F> ex(fam, z0, c.T, engine_options(c));
        const int N = choose_orders(c, ex);
        const double bound = ex.remainder_bound(N);

        int nx = 41, nl = 21;
        if (c.grid != "auto") {
            char comma = 0;
            std::istringstream in(c.grid);
            if (!(in >> nx >> comma >> nl) || comma != ',' || nx < 2 || nl < 1) {
                throw DomainError("--grid must be 'auto' or 'NX,NL' with NX >= 2, NL >= 1");
            }
        }
        const double rho = std::sqrt(field.a_sup() * c.T);
        const double x_lo = z0.x - 4.0 * rho;
        const double x_hi = (max_family ? z0.a : z0.x) + 4.0 * rho;
        std::vector<State> cont, atom;
        for (int j = 1; j <= nl; ++j) {
            const double level = z0.a + 4.0 * rho * j / nl;
            for (int i = 0; i < nx; ++i) {
                const double x = x_lo + (x_hi - x_lo) * i / (nx - 1);
                if (max_family && x > level) continue;
                cont.push_back({x, level});
            }
        }
        if (fam.has_atom(z0)) {
            for (int i = 0; i < nx; ++i) {
                const double x = x_lo + (x_hi - x_lo) * i / (nx - 1);
                if (max_family ? x > z0.a : x * z0.x < 0.0) continue;
                atom.push_back({x, z0.a});
            }
        }
        std::vector<State> all = cont;
        all.insert(all.end(), atom.begin(), atom.end());
        std::vector<double> vals(all.size());
        ex.prepare_pointwise(N);
        parallel_for(all.size(), ex.threads(), [&](std::size_t i) {
            double v = 0.0;
            for (int n = 0; n <= N; ++n) v += ex.term(n, c.T, all[i]).value;
            vals[i] = v;
        });

        const char* level_name = max_family ? "m" : "l";
        std::string csv = std::string("x,") + level_name + ",density\n";
        for (std::size_t i = 0; i < cont.size(); ++i) {
            csv += fmt17(cont[i].x) + "," + fmt17(cont[i].a) + "," + fmt17(vals[i]) + "\n";
        }
        write_file(c.out + ".csv", csv);
        std::string acsv = "x,density\n";
        for (std::size_t i = 0; i < atom.size(); ++i) {
            acsv += fmt17(atom[i].x) + "," + fmt17(vals[cont.size() + i]) + "\n";
        }
        write_file(c.out + "_atom.csv", acsv);
        std::printf("density: %s, %zu continuous and %zu atom points, N = %d, remainder bound %.3g\n", F::kName.data(),
                    cont.size(), atom.size(), N, bound);
        std::printf("wrote %s.csv and %s_atom.csv\n", c.out.c_str(), c.out.c_str());
        if (c.orders < 0 && !(bound < c.tol)) {
            std::printf("order cap %d reached with remainder bound above tol %.3g\n", N, c.tol);
            return kExitCheckFailed;
        }
        return 0;
    });
}

// ----------------------------------------------------------- series-study

int run_series_study(const RunConfig& c) {
    const auto field = load_field(c);
    const State z0 = parse_state(c.start);
    return with_family(c, field, [&](auto fam) {
        using F = decltype(fam);
        Expansion<F> ex(fam, z0, c.T, engine_options(c));
        const int N = c.orders >= 0 ? c.orders : 2;
        if (N > ex.options().n_max) throw UnsupportedOrderError("--orders exceeds the supported maximum");
        ex.prepare(N);
        std::vector<quad::Estimate> mass(N + 1), atom(N + 1);
        for (int n = 0; n <= N; ++n) {
            mass[n] = ex.integrate_order(n, Region{});
            atom[n] = ex.integrate_order(n, Region{Region::Parts::atom});
        }
        json j;
        j["command"] = "series-study";
        j["params"] = {{"family", F::kName}, {"T", c.T}, {"start", {z0.x, z0.a}}, {"orders", N},
                       {"coefficients", json::parse(to_json(field.spec()))}};
        j["smoothing_constant"] = ex.smoothing_constant();
        auto rows = json::array();
        double cumulative = 0.0, cumulative_atom = 0.0;
        for (int n = 0; n <= N; ++n) {
            cumulative += mass[n].value;
            cumulative_atom += atom[n].value;
            rows.push_back({{"order", n},
                            {"mass", mass[n].value},
                            {"mass_quadrature_error", mass[n].error},
                            {"atom_mass", atom[n].value},
                            {"cumulative_mass_deviation", cumulative - 1.0},
                            {"cumulative_atom_mass", cumulative_atom},
                            {"remainder_bound", ex.remainder_bound(n)}});
        }
        j["orders"] = rows;
        write_file(c.out + ".json", j.dump(2));
        std::printf("series-study: %s, C_T = %.6g, |mass - 1| at N = %d: %.3e, R_N = %.3e\n", F::kName.data(),
                    ex.smoothing_constant(), N, std::abs(cumulative - 1.0), ex.remainder_bound(N));
        std::printf("wrote %s.json\n", c.out.c_str());
        return 0;
    });
}

// ------------------------------------------------------------ mc-validate

int run_mc_validate(const RunConfig& c) {
    const auto field = load_field(c);
    const State z0 = parse_state(c.start);
    if (!(c.paths >= 1.0) || c.paths != std::floor(c.paths)) throw DomainError("--paths must be a positive integer");
    SimulationPlan plan;
    plan.family = parse_family(c.family);
    plan.field = field;
    plan.T = c.T;
    plan.steps = c.steps;
    plan.paths = static_cast<std::int64_t>(c.paths);
    plan.seed = c.seed;
    plan.scheme = scheme_from_string(c.scheme);
    plan.threads = c.threads;
    plan.keep_samples = true;
    const SimulationResult sim = simulate(plan, z0);

    return with_family(c, field, [&](auto fam) {
        using F = decltype(fam);
        Expansion<F> ex(fam, z0, c.T, engine_options(c));
        const int N = c.orders >= 0 ? c.orders : 2;
        if (N > ex.options().n_max) throw UnsupportedOrderError("--orders exceeds the supported maximum");
        const DensityMarginals dm = integrate_marginals(ex, N);
        ComparisonTolerances tol;
        tol.bias_allowance = dm.remainder_bound;
        const ComparisonReport rep = compare_to_density(sim.samples, dm, tol);

        json j;
        j["command"] = "mc-validate";
        j["params"] = {{"family", F::kName}, {"T", c.T},         {"start", {z0.x, z0.a}}, {"paths", plan.paths},
                       {"steps", c.steps},   {"scheme", c.scheme}, {"seed", c.seed},       {"orders", N},
                       {"coefficients", json::parse(to_json(field.spec()))}};
        j["pass"] = rep.pass();
        j["simulation"] = json::parse(summary_json(plan, z0, sim.summary));
        j["comparison"] = json::parse(report_json(rep));
        j["density"] = {{"atom_mass", dm.atom_mass}, {"total_mass", dm.total_mass},
                        {"remainder_bound", dm.remainder_bound}};
        write_file(c.out + ".json", j.dump(2));
        if (c.write_samples) {
            std::ofstream os(c.out + "_samples.csv", std::ios::binary);
            write_samples_csv(os, sim.samples);
        }
        std::printf("mc-validate: %s, %lld paths, atom MC %.5f vs series %.5f (z = %.2f), KS x %.4g / %.4g, "
                    "KS level %.4g / %.4g, max cell z %.2f: %s\n",
                    F::kName.data(), static_cast<long long>(plan.paths), rep.atom_mc, rep.atom_density, rep.atom_z,
                    rep.ks_x, rep.ks_threshold_x, rep.ks_level, rep.ks_threshold_level, rep.max_cell_z,
                    rep.pass() ? "PASS" : "FAIL");
        std::printf("wrote %s.json\n", c.out.c_str());
        return rep.pass() ? 0 : kExitCheckFailed;
    });
}

// -------------------------------------------------------- smoothing-check

int run_smoothing_check(const RunConfig& c) {
    const auto field = load_field(c);
    const State z0 = parse_state(c.start);
    if (c.t_points < 8) throw DomainError("--points must be at least 8");
    return with_family(c, field, [&](auto fam) {
        using F = decltype(fam);
        const SlopeFit fit =
            check_smoothing_property(fam, z0, log_spaced(c.t_min, c.t_max, c.t_points), c.slack, c.threads);
        write_file(c.out + ".json", to_json(fit, F::kName, z0));
        if (fit.degenerate) {
            std::printf("smoothing-check: %s, kernel vanishes: degenerate pass\n", F::kName.data());
        } else {
            std::printf("smoothing-check: %s, slope %.4f vs threshold %.4f: %s\n", F::kName.data(), fit.slope,
                        fit.threshold, fit.pass ? "PASS" : "FAIL");
        }
        std::printf("wrote %s.json\n", c.out.c_str());
        return fit.pass ? 0 : kExitCheckFailed;
    });
}

// ----------------------------------------------------------- bounds-check

int run_bounds_check(const RunConfig& c) {
    const auto field = load_field(c);
    const State z0 = parse_state(c.start);
    return with_family(c, field, [&](auto fam) {
        using F = decltype(fam);
        Expansion<F> ex(fam, z0, c.T, engine_options(c));
        const int N = c.orders >= 0 ? c.orders : 1;
        if (N > ex.options().n_max) throw UnsupportedOrderError("--orders exceeds the supported maximum");
        BoundGrid g;
        g.nx = c.nx;
        g.nlevel = c.nlevel;
        g.span = c.span;
        g.corruption = c.corruption;
        const GaussianBoundReport rep = check_gaussian_upper_bounds(ex, N, g);
        write_file(c.out + ".json", to_json(rep, F::kName));
        std::printf("bounds-check: %s, T = %g, continuous C = %.4g c = %.3g, atom C = %.4g c = %.3g: %s\n",
                    F::kName.data(), c.T, rep.continuous.C, rep.continuous.c, rep.atom.C, rep.atom.c,
                    rep.pass ? "PASS" : "FAIL");
        std::printf("wrote %s.json\n", c.out.c_str());
        return rep.pass ? 0 : kExitCheckFailed;
    });
}

// ------------------------------------------------------------ lemma-check

int run_lemma_check(const RunConfig& c) {
    const bool all = c.lemma == "all";
    if (!all && c.lemma != "beta" && c.lemma != "passage" && c.lemma != "convolution" && c.lemma != "kernel") {
        throw DomainError("--lemma must be one of all, beta, passage, convolution, kernel");
    }
    json j;
    j["command"] = "lemma-check";
    bool pass = true;
    if (all || c.lemma == "beta") {
        auto arr = json::array();
        for (int n = 1; n <= 3; ++n) {
            for (double a : {0.0, 0.3, 0.5, 0.7}) {
                for (double b : {-0.3, 0.0, 1.0}) {
                    const auto r = check_beta_integral(n, a, b, 1.0);
                    const auto rj = json::parse(to_json(r));
                    pass = pass && rj["pass"].get<bool>();
                    arr.push_back(rj);
                }
            }
        }
        j["beta_integral"] = arr;
    }
    if (all || c.lemma == "passage") {
        const auto r = check_passage_convolution({0.1, 0.3, 0.5, 1.0, 2.0}, {0.1, 0.3, 0.5, 1.0, 2.0}, {0.25, 1.0, 4.0});
        pass = pass && r.pass;
        j["passage_convolution"] = json::parse(to_json(r));
    }
    if (all || c.lemma == "convolution") {
        auto arr = json::array();
        for (Functional fam : {Functional::local_time, Functional::running_max}) {
            std::vector<LemmaEndpoint> ends;
            for (double x0 : {-1.0, -0.3, 0.0}) {
                for (double x : {-1.5, -0.5, 0.0, 0.5}) {
                    for (double dl : {0.1, 0.5, 1.5}) {
                        if (fam == Functional::running_max && x > dl) continue;
                        ends.push_back({{x0, 0.0}, {x, dl}});
                    }
                }
            }
            for (double s : {0.1, 0.5, 0.9}) {
                const auto r = check_convolution_lemma(fam, 1.0, s, ends);
                pass = pass && r.pass;
                arr.push_back(json::parse(to_json(r)));
            }
        }
        j["convolution_lemma"] = arr;
    }
    if (all || c.lemma == "kernel") {
        auto arr = json::array();
        std::vector<std::pair<double, double>> killed, reflected;
        for (double x0 : {0.0, 0.05, 0.2, 0.5, 1.0, 2.0}) {
            for (double x : {0.0, 0.1, 0.3, 0.7, 1.5, 3.0}) {
                killed.push_back({x0, x});
                reflected.push_back({-x0, -x});
            }
        }
        for (double t : {0.1, 1.0}) {
            for (double beta : {0.0, 0.5, 1.0}) {
                const auto rk = check_kernel_estimates(ProxyKernel::killed, beta, t, killed);
                const auto rr = check_kernel_estimates(ProxyKernel::reflected, beta, t, reflected);
                pass = pass && rk.pass && rr.pass;
                arr.push_back(json::parse(to_json(rk)));
                arr.push_back(json::parse(to_json(rr)));
            }
        }
        j["kernel_estimates"] = arr;
    }
    j["pass"] = pass;
    write_file(c.out + ".json", j.dump(2));
    std::printf("lemma-check (%s): %s\n", c.lemma.c_str(), pass ? "PASS" : "FAIL");
    std::printf("wrote %s.json\n", c.out.c_str());
    return pass ? 0 : kExitCheckFailed;
}

void add_common(CLI::App* sub, RunConfig& c, bool needs_family = true) {
    if (needs_family) {
        sub->add_option("--family", c.family, "local-time or max")->capture_default_str();
        sub->add_option("--coeff", c.coeff, "coefficient JSON file (default: a = 1, b = 0)");
        sub->add_option("--start", c.start, "start state x,a")->capture_default_str();
    }
    sub->add_option("--threads", c.threads, "worker cap (default: PARAMETRIX_THREADS, else all cores)");
    sub->add_option("--out", c.out, "output path prefix")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"Parametrix expansion of diffusions with local time or running maximum"};
    app.require_subcommand(1);

    auto* density = app.add_subcommand("density", "evaluate the truncated series on a grid");
    add_common(density, c);
    density->add_option("--T", c.T, "horizon")->required()->check(CLI::PositiveNumber);
    density->add_option("--grid", c.grid, "'auto' or NX,NL")->capture_default_str();
    density->add_option("--tol", c.tol, "remainder tolerance used to pick N")->check(CLI::PositiveNumber);
    density->add_option("--orders", c.orders, "number of correction orders (overrides --tol)");

    auto* study = app.add_subcommand("series-study", "per-order masses and remainder bounds");
    add_common(study, c);
    study->add_option("--T", c.T, "horizon")->required()->check(CLI::PositiveNumber);
    study->add_option("--orders", c.orders, "highest order (default 2)");

    auto* mc = app.add_subcommand("mc-validate", "Monte Carlo against the integrated series");
    add_common(mc, c);
    mc->add_option("--T", c.T, "horizon")->check(CLI::PositiveNumber)->capture_default_str();
    mc->add_option("--paths", c.paths, "number of paths (1e6 accepted)")->capture_default_str();
    mc->add_option("--steps", c.steps, "time steps per path")->check(CLI::PositiveNumber)->capture_default_str();
    mc->add_option("--scheme", c.scheme, "proxy_step, euler_tanaka or euler_bridge_max")->capture_default_str();
    mc->add_option("--seed", c.seed, "random seed")->capture_default_str();
    mc->add_option("--orders", c.orders, "series orders (default 2)");
    mc->add_flag("--samples", c.write_samples, "also write the samples CSV");

    auto* smooth = app.add_subcommand("smoothing-check", "log-log slope of the kernel smoothing integral");
    add_common(smooth, c);
    smooth->add_option("--tmin", c.t_min, "smallest time")->capture_default_str();
    smooth->add_option("--tmax", c.t_max, "largest time")->capture_default_str();
    smooth->add_option("--points", c.t_points, "log-spaced times")->capture_default_str();
    smooth->add_option("--slack", c.slack, "allowed shortfall of the slope")->capture_default_str();
    smooth->add_flag("--with-drift", c.with_drift, "local-time kernel with the drift term");

    auto* bounds = app.add_subcommand("bounds-check", "fit Gaussian upper-bound constants");
    add_common(bounds, c);
    bounds->add_option("--T", c.T, "horizon")->required()->check(CLI::PositiveNumber);
    bounds->add_option("--orders", c.orders, "series orders (default 1)");
    bounds->add_option("--nx", c.nx, "grid points in x")->capture_default_str();
    bounds->add_option("--nlevel", c.nlevel, "grid points in the functional")->capture_default_str();
    bounds->add_option("--span", c.span, "grid half-width in proxy scales")->capture_default_str();
    bounds->add_option("--corrupt", c.corruption, "multiply values by this^(r/sqrt T), checker sanity")
        ->capture_default_str();

    auto* lemma = app.add_subcommand("lemma-check", "closed-form lemma checks");
    add_common(lemma, c, false);
    lemma->add_option("--lemma", c.lemma, "all, beta, passage, convolution or kernel")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*density) return run_density(c);
        if (*study) return run_series_study(c);
        if (*mc) return run_mc_validate(c);
        if (*smooth) return run_smoothing_check(c);
        if (*bounds) return run_bounds_check(c);
        if (*lemma) return run_lemma_check(c);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitError;
    } catch (const TruncationError& e) {
        std::fprintf(stderr, "truncation: %s\n", e.what());
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
