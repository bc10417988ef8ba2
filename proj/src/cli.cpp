#include "equilibra/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "equilibra/certify.hpp"
#include "equilibra/dynamics.hpp"
#include "equilibra/reports.hpp"

namespace equilibra::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
    static int level = [] {
        const char* env = std::getenv("EQUILIBRA_LOG");
        if (!env) return 1;
        std::string s(env);
        if (s == "error") return 0;
        if (s == "info") return 1;
        if (s == "debug") return 2;
        std::cerr << "equilibra: unknown EQUILIBRA_LOG value '" << s
                  << "', falling back to info\n";
        return 1;
    }();
    return level;
}

void log_error(const std::string& msg) { std::cerr << "equilibra: " << msg << '\n'; }

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "equilibra: " << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "equilibra: " << msg << '\n';
}

fs::path out_path(const Options& opts, const char* name) {
    return fs::path(opts.out_dir) / name;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file " + path.string());
    os << j.dump(2) << '\n';
    if (!os) throw ConfigError("failed writing " + path.string());
}

template <typename Writer>
void write_csv_file(const fs::path& path, Writer&& writer) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file " + path.string());
    writer(os);
    if (!os) throw ConfigError("failed writing " + path.string());
}

// index-parallel map with deterministic result placement; exceptions from
// workers are rethrown on the calling thread
void parallel_map(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct Assembled {
    REProblem problem;
    std::vector<Eigen::VectorXd> positions;
};

Assembled assemble_problem(const RunConfig& cfg) {
    Assembled out;
    if (cfg.seed_name) {
        if (cfg.space || !cfg.masses.empty() || cfg.generator_omega ||
            cfg.generator_matrix || cfg.positions)
            throw ConfigError(
                "a named seed replaces the explicit space/masses/generator/positions "
                "blocks; give one or the other");
        SeedResult sr = build_seed(*cfg.seed_name, cfg.seed_params, cfg.law);
        out.problem = std::move(sr.problem);
        out.positions = std::move(sr.positions);
    } else {
        if (!cfg.space)
            throw ConfigError("config needs either a seed or an explicit space block");
        if (cfg.masses.empty()) throw ConfigError("explicit problems need masses");
        out.problem.space = *cfg.space;
        out.problem.masses = cfg.masses;
        out.problem.law = cfg.law;
        if (cfg.generator_omega)
            out.problem.gen = planar_rotation(*cfg.generator_omega, *cfg.space);
        else if (cfg.generator_matrix)
            out.problem.gen = validate_generator(*cfg.generator_matrix, *cfg.space);
        else
            throw ConfigError("explicit problems need a generator (omega or matrix)");
        if (!cfg.positions)
            throw ConfigError("explicit problems need positions (or use a seed)");
        out.positions = *cfg.positions;
    }
    if (cfg.scale_positions != 1.0) {
        if (out.problem.space.curved())
            throw ConfigError("scale_positions would leave the curved manifold");
        for (auto& q : out.positions) q *= cfg.scale_positions;
    }
    out.problem.validate();
    return out;
}

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

Assertion check(const std::string& name, bool pass, const std::string& detail) {
    return Assertion{name, pass, detail};
}

// appends the assertion list and overall verdict to a probe report
bool finish_probe_report(json& j, const std::vector<Assertion>& assertions) {
    bool all = true;
    json list = json::array();
    for (const auto& a : assertions) {
        all = all && a.pass;
        list.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
        if (!a.pass) log_error("probe assertion failed: " + a.name + " (" + a.detail + ")");
    }
    j["assertions"] = list;
    j["pass"] = all;
    return all;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> geometric_grid(double s_max, double s_min, int points) {
    if (!(s_min > 0) || !(s_max > s_min) || points < 2)
        throw ConfigError("probe grid needs 0 < s_min < s_max and at least 2 points");
    std::vector<double> grid(points);
    double step = std::log(s_min / s_max) / (points - 1);
    for (int k = 0; k < points; ++k) grid[k] = s_max * std::exp(step * k);
    grid.front() = s_max;
    grid.back() = s_min;
    return grid;
}

SpaceForm probe_space(const ProbeConfig& pr) {
    return pr.space == "sphere" ? SpaceForm::sphere(2) : SpaceForm::hyperboloid(2);
}

int certify_divergence_flat(const RunConfig& cfg, const ProbeConfig& pr,
                            const Options& opts) {
    if (!cfg.law) throw ConfigError("divergence_flat needs a law block");
    const ForceLaw& law = *cfg.law;

    std::vector<Eigen::VectorXd> far = pr.far_bodies;
    if (far.empty())
        far.push_back((Eigen::VectorXd(2) << 0.7, 1.9).finished());
    for (const auto& q : far)
        if (q.size() != 2) throw ConfigError("far bodies must be planar points");

    std::vector<double> masses = pr.masses;
    if (masses.empty()) masses.assign(2 + far.size(), 1.0);
    if (masses.size() != 2 + far.size())
        throw ConfigError("probe masses must cover the shrinking pair plus the far bodies");

    RotationGenerator gen = planar_rotation(pr.omega, SpaceForm::flat(2));

    // body 2 at the origin, body 1 approaching it along the x-axis; the far
    // bodies sit off-axis so the triangle ratio stays strictly below 1
    ShrinkPath path = [&far](double s) {
        std::vector<Eigen::VectorXd> Q;
        Q.push_back((Eigen::VectorXd(2) << s, 0.0).finished());
        Q.push_back(Eigen::VectorXd::Zero(2));
        for (const auto& q : far) Q.push_back(q);
        return Q;
    };

    DivergenceProbeResult result = collision_divergence_probe(
        masses, gen, law, path, geometric_grid(pr.s_max, pr.s_min, pr.points));

    std::vector<Assertion> assertions;
    double gamma = law.dominant_exponent();
    if (std::isfinite(gamma))
        assertions.push_back(check("slope_window", std::abs(result.slope + gamma) <= 0.05,
                                   "fitted slope " + fmt(result.slope) + " vs -" +
                                       fmt(gamma) + " +/- 0.05"));
    assertions.push_back(check("triangle_bound",
                               result.triangle_ratio_max <= 1.0 + 1e-12,
                               "max ratio " + fmt(result.triangle_ratio_max)));
    double band0 = std::abs(result.remainder.front());
    double band_max = 0;
    for (double r : result.remainder) band_max = std::max(band_max, std::abs(r));
    assertions.push_back(check("remainder_band", band_max <= 10.0 * band0,
                               "max |remainder| " + fmt(band_max) + " vs 10 x " +
                                   fmt(band0) + " at the largest s"));
    double needed = std::max(1e6, result.c2);
    assertions.push_back(check("bound_exceeds_generator",
                               result.required_bound.back() > needed,
                               "required bound " + fmt(result.required_bound.back()) +
                                   " at s = " + fmt(result.s.back()) + " vs " +
                                   fmt(needed)));

    json j = to_json(result);
    j["law"] = law_to_json(law);
    bool pass = finish_probe_report(j, assertions);
    write_json_file(out_path(opts, "probe_divergence.json"), j);
    write_csv_file(out_path(opts, "probe_divergence.csv"),
                   [&](std::ostream& os) { write_divergence_csv(os, result); });
    return pass ? kExitOk : kExitMath;
}

struct IdentityCase {
    std::vector<Eigen::VectorXd> Q;
    std::vector<double> masses;
};

// deterministic batch of on-manifold configurations with every pair kept
// away from the denominator singularities (coincident and, on the sphere,
// antipodal points)
std::vector<IdentityCase> make_identity_batch(const SpaceForm& space, int count,
                                              int n_max, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_n(2, n_max);
    std::uniform_real_distribution<double> pick_mass(0.5, 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto sphere_point = [&]() {
        Eigen::VectorXd v(3);
        do {
            for (int c = 0; c < 3; ++c) v(c) = gauss(rng);
        } while (v.norm() < 1e-6);
        return Eigen::VectorXd(v / v.norm());
    };
    auto hyperboloid_point = [&]() {
        Eigen::VectorXd v(3);
        v(0) = gauss(rng);
        v(1) = gauss(rng);
        v(2) = std::sqrt(1.0 + v(0) * v(0) + v(1) * v(1));
        return v;
    };

    auto pair_ok = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        double dot = inner(a, b, space);
        // sphere: stay away from both +1 and -1; hyperboloid: dot <= -1 always,
        // keep it strictly below
        return space.sigma > 0 ? std::abs(dot) <= 0.9 : dot <= -1.001;
    };

    std::vector<IdentityCase> batch;
    batch.reserve(count);
    for (int c = 0; c < count; ++c) {
        IdentityCase item;
        int n = pick_n(rng);
        for (int i = 0; i < n; ++i) item.masses.push_back(pick_mass(rng));
        for (int attempt = 0;; ++attempt) {
            if (attempt > 10000)
                throw ConfigError("could not draw a well-separated random configuration");
            item.Q.clear();
            for (int i = 0; i < n; ++i)
                item.Q.push_back(space.sigma > 0 ? sphere_point() : hyperboloid_point());
            bool ok = true;
            for (int i = 0; i < n && ok; ++i)
                for (int j = i + 1; j < n && ok; ++j) ok = pair_ok(item.Q[i], item.Q[j]);
            if (ok) break;
        }
        batch.push_back(std::move(item));
    }
    return batch;
}

int certify_cluster_identity(const RunConfig& cfg, const ProbeConfig& pr,
                             const Options& opts) {
    SpaceForm space = probe_space(pr);
    if (pr.count < 1 || pr.n_max < 2)
        throw ConfigError("identity batch needs count >= 1 and n_max >= 2");

    std::vector<IdentityCase> batch =
        make_identity_batch(space, pr.count, pr.n_max, cfg.rng_seed);
    std::vector<ClusterIdentityResult> results(batch.size());
    parallel_map(static_cast<int>(batch.size()), opts.threads, [&](int i) {
        std::vector<int> cluster(batch[i].Q.size());
        std::iota(cluster.begin(), cluster.end(), 0);
        results[i] = curved_cluster_identity(batch[i].Q, batch[i].masses, space, cluster);
    });

    double max_rel = 0, max_alt = 0;
    for (const auto& r : results) {
        max_rel = std::max(max_rel, r.residual_rel);
        max_alt = std::max(max_alt, r.residual_rel_alt);
    }

    std::vector<Assertion> assertions;
    assertions.push_back(check("identity_residual", max_rel < 1e-12,
                               "max relative residual " + fmt(max_rel)));
    if (space.sigma > 0)
        assertions.push_back(check("alt_reading_coincides", max_alt < 1e-12,
                                   "the two denominator readings agree on the sphere; "
                                   "max alt residual " + fmt(max_alt)));
    else
        assertions.push_back(check("alt_reading_differs", max_alt > 1e-6,
                                   "the unsigned reading must fail on the hyperboloid; "
                                   "max alt residual " + fmt(max_alt)));

    json j{{"space", to_string(space.kind)},
           {"count", pr.count},
           {"n_max", pr.n_max},
           {"rng_seed", cfg.rng_seed},
           {"max_residual_rel", max_rel},
           {"max_residual_rel_alt", max_alt},
           {"denominator_resolution", results.front().denominator_resolution}};
    bool pass = finish_probe_report(j, assertions);
    write_json_file(out_path(opts, "probe_identity.json"), j);
    return pass ? kExitOk : kExitMath;
}

// two cluster bodies straddling a reference point on the x >= 0 meridian,
// separated by extrinsic distance s, plus one fixed far body
ClusterPath sphere_cluster_path() {
    return [](double s) {
        const double theta0 = 0.7;
        double dtheta = 2.0 * std::asin(0.5 * s);
        auto meridian = [](double th) {
            return (Eigen::VectorXd(3) << std::sin(th), 0.0, std::cos(th)).finished();
        };
        std::vector<Eigen::VectorXd> Q{meridian(theta0 - 0.5 * dtheta),
                                       meridian(theta0 + 0.5 * dtheta)};
        Q.push_back((Eigen::VectorXd(3) << 0.0, std::sin(2.2), std::cos(2.2)).finished());
        return Q;
    };
}

ClusterPath hyperboloid_cluster_path() {
    return [](double s) {
        const double theta0 = 0.5;
        // arc-length parameter: |d/dth (sinh th, 0, cosh th)| = sqrt(cosh 2 th)
        double delta = 0.5 * s / std::sqrt(std::cosh(2.0 * theta0));
        auto meridian = [](double th) {
            return (Eigen::VectorXd(3) << std::sinh(th), 0.0, std::cosh(th)).finished();
        };
        std::vector<Eigen::VectorXd> Q{meridian(theta0 - delta), meridian(theta0 + delta)};
        Q.push_back((Eigen::VectorXd(3) << 0.0, std::sinh(2.0), std::cosh(2.0)).finished());
        return Q;
    };
}

int certify_cluster_divergence(const RunConfig& cfg, const ProbeConfig& pr,
                               const Options& opts) {
    SpaceForm space = probe_space(pr);
    std::vector<double> masses = pr.masses;
    if (masses.empty()) masses.assign(3, 1.0);
    if (masses.size() != 3)
        throw ConfigError("the built-in cluster path uses 3 bodies (pair plus far)");

    RotationGenerator gen = planar_rotation(pr.omega, space);
    ClusterPath path = space.sigma > 0 ? sphere_cluster_path() : hyperboloid_cluster_path();

    ClusterDivergenceResult result =
        curved_cluster_divergence(masses, gen, {0, 1}, path, pr.epsilon,
                                  geometric_grid(pr.s_max, pr.s_min, pr.points));

    std::vector<Assertion> assertions;
    assertions.push_back(check(
        "divergence_threshold",
        result.s.back() < 1e-5 && result.rhs.back() > 1e6,
        "rhs " + fmt(result.rhs.back()) + " at gap " + fmt(result.s.back())));
    assertions.push_back(check("slope_window", std::abs(result.slope + 1.0) <= 0.1,
                               "fitted slope " + fmt(result.slope) + " vs -1 +/- 0.1"));
    assertions.push_back(check(
        "bounded_far_side",
        std::isfinite(result.lhs_band_lo) && std::isfinite(result.lhs_band_hi),
        "lhs band [" + fmt(result.lhs_band_lo) + ", " + fmt(result.lhs_band_hi) + "]"));

    json j = to_json(result);
    j["space"] = to_string(space.kind);
    bool pass = finish_probe_report(j, assertions);
    write_json_file(out_path(opts, "probe_cluster.json"), j);
    write_csv_file(out_path(opts, "probe_cluster.csv"),
                   [&](std::ostream& os) { write_cluster_csv(os, result); });
    return pass ? kExitOk : kExitMath;
}

}  // namespace

int cmd_validate_law(const RunConfig& cfg, const Options& opts) {
    if (!cfg.law) throw ConfigError("validate_law needs a law block");
    AdmissibilityOptions ao = cfg.admissibility.value_or(AdmissibilityOptions{});
    AdmissibilityReport report = admissibility_check(*cfg.law, ao);
    write_json_file(out_path(opts, "admissibility.json"), to_json(report));
    if (!report.pass()) {
        for (const auto& c : report.conditions)
            if (!c.pass) log_error("admissibility: " + c.name + " failed (" + c.detail + ")");
        return kExitMath;
    }
    log_info("law '" + cfg.law->name() + "' is admissible");
    return kExitOk;
}

int cmd_find(const RunConfig& cfg, const Options& opts) {
    Assembled a = assemble_problem(cfg);
    RESolution sol = newton_solve(a.problem, a.positions, cfg.solver);
    VerifyReport rep = verify(sol.positions, a.problem, cfg.solver.tol);
    write_json_file(out_path(opts, "solution.json"),
                    solution_document(a.problem, sol, rep));
    if (!rep.is_re) {
        log_error("solution failed verification: " + rep.diagnostic);
        return kExitMath;
    }
    log_info("converged in " + std::to_string(sol.newton_iterations) +
             " iterations, residual " + fmt(sol.residual_norm));
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const Options& opts) {
    if (!cfg.sweep) throw ConfigError("sweep needs a sweep block");
    const SweepConfig& sw = *cfg.sweep;
    Assembled a = assemble_problem(cfg);

    std::vector<double> grid(sw.points);
    for (int k = 0; k < sw.points; ++k)
        grid[k] = sw.points == 1
                      ? sw.from
                      : sw.from + (sw.to - sw.from) * (k / (sw.points - 1.0));

    ContinuationOptions co;
    co.solve = cfg.solver;
    co.trust_radius = sw.trust_radius;
    ContinuationFamily family =
        continue_family(a.problem, a.positions, sw.parameter, grid, co);

    write_csv_file(out_path(opts, "family.csv"),
                   [&](std::ostream& os) { write_family_csv(os, family); });
    write_json_file(out_path(opts, "family.json"), to_json(family));

    if (!family.complete) {
        write_json_file(out_path(opts, "error.json"),
                        json{{"error", "BranchLost"}, {"detail", family.abort_reason}});
        log_error("continuation aborted after " + std::to_string(family.steps.size()) +
                  " of " + std::to_string(grid.size()) + " steps: " + family.abort_reason);
        return kExitMath;
    }
    log_info("family traced over " + std::to_string(family.steps.size()) + " grid points");

    write_json_file(out_path(opts, "separation.json"), to_json(separation_scan(family)));
    if (sw.boundedness) {
        if (!a.problem.law)
            throw ConfigError("boundedness certificates need a force law");
        write_json_file(out_path(opts, "boundedness.json"),
                        to_json(boundedness_scan(family, *a.problem.law)));
    }
    return kExitOk;
}

int cmd_certify(const RunConfig& cfg, const Options& opts) {
    if (!cfg.probe) throw ConfigError("certify needs a probe block");
    const ProbeConfig& pr = *cfg.probe;
    log_debug("running probe kind '" + pr.kind + "'");
    if (pr.kind == "divergence_flat") return certify_divergence_flat(cfg, pr, opts);
    if (pr.kind == "cluster_identity") return certify_cluster_identity(cfg, pr, opts);
    return certify_cluster_divergence(cfg, pr, opts);
}

int cmd_simulate(const RunConfig& cfg, const Options& opts) {
    SimulateConfig sim = cfg.simulate.value_or(SimulateConfig{});

    REProblem problem;
    std::vector<Eigen::VectorXd> Q;
    if (cfg.solution_path) {
        if (cfg.seed_name || cfg.positions)
            throw ConfigError("a solution file and an inline problem are mutually exclusive");
        std::ifstream is(*cfg.solution_path);
        if (!is) throw ConfigError("cannot open solution file " + *cfg.solution_path);
        json doc;
        try {
            doc = json::parse(is);
        } catch (const json::exception& e) {
            throw ConfigError("solution file " + *cfg.solution_path + ": " + e.what());
        }
        try {
            solution_from_document(doc, problem, Q);
        } catch (const json::exception& e) {
            throw ConfigError("solution file " + *cfg.solution_path + ": " + e.what());
        }
    } else {
        Assembled a = assemble_problem(cfg);
        problem = std::move(a.problem);
        if (cfg.seed_name) {
            // polish the seed so the run starts from an accepted equilibrium
            RESolution sol = newton_solve(problem, a.positions, cfg.solver);
            Q = std::move(sol.positions);
        } else {
            // explicit positions are integrated as-is: feeding a perturbed
            // configuration and reading the drift report is the point
            Q = std::move(a.positions);
        }
    }

    std::vector<Eigen::VectorXd> V;
    V.reserve(Q.size());
    for (const auto& q : Q) V.push_back(problem.gen.G() * q);

    double c2 = problem.gen.c2();
    if (!(c2 > 0))
        throw ConfigError("generator carries no rotation to set the period scale");
    const double t_end = sim.periods * 2.0 * M_PI / std::sqrt(c2);

    PhaseState state0{Configuration{problem.space, problem.masses, Q}, V};
    state0.validate();

    Trajectory traj;
    bool singular = false;
    std::string singular_detail;
    if (t_end == 0) {
        traj.space = problem.space;
        traj.masses = problem.masses;
        traj.samples.push_back(TrajectorySample{0.0, Q, V});
    } else {
        IntegrateOptions io;
        io.n_samples = sim.n_samples;
        try {
            traj = problem.space.curved()
                       ? integrate(state0, t_end, sim.rel_tol, io)
                       : integrate(state0, *problem.law, t_end, sim.rel_tol, io);
        } catch (const SingularityEncountered& e) {
            traj = e.partial();
            singular = true;
            singular_detail = e.what();
            log_error(singular_detail);
        }
    }

    write_csv_file(out_path(opts, "trajectory.csv"),
                   [&](std::ostream& os) { write_trajectory_csv(os, traj); });
    write_json_file(out_path(opts, "trajectory_drift.json"), trajectory_drift_json(traj));

    double shape_drift = rigidity_report(traj);
    bool pass = shape_drift < sim.drift_bound;
    json rigidity{{"max_shape_drift", shape_drift},
                  {"drift_bound", sim.drift_bound},
                  {"periods", sim.periods},
                  {"horizon", t_end},
                  {"rel_tol", sim.rel_tol},
                  {"samples", traj.samples.size()}};
    if (problem.space.curved()) {
        rigidity["max_constraint_drift"] = traj.max_constraint_drift;
        rigidity["constraint_drift_bound"] = sim.constraint_drift_bound;
        pass = pass && traj.max_constraint_drift < sim.constraint_drift_bound;
    }
    if (singular) {
        rigidity["singularity"] = singular_detail;
        pass = false;
    }
    rigidity["pass"] = pass;
    write_json_file(out_path(opts, "rigidity.json"), rigidity);

    if (!pass) {
        log_error("rigidity check failed: shape drift " + fmt(shape_drift) + " over " +
                  fmt(sim.periods) + " periods");
        return kExitMath;
    }
    log_info("rigid over " + fmt(sim.periods) + " periods: shape drift " +
             fmt(shape_drift));
    return kExitOk;
}

int run(const std::string& command, const Options& opts) {
    try {
        if (opts.config_path.empty()) {
            log_error("a --config file is required");
            return kExitConfig;
        }
        if (opts.threads < 1) {
            log_error("--threads must be at least 1");
            return kExitConfig;
        }
        RunConfig cfg = load_config(opts.config_path);
        std::error_code ec;
        fs::create_directories(opts.out_dir, ec);  // failures surface on first write

        if (command == "validate_law") return cmd_validate_law(cfg, opts);
        if (command == "find") return cmd_find(cfg, opts);
        if (command == "sweep") return cmd_sweep(cfg, opts);
        if (command == "certify") return cmd_certify(cfg, opts);
        if (command == "simulate") return cmd_simulate(cfg, opts);
        log_error("unknown command '" + command + "'");
        return kExitConfig;
    } catch (const ConfigError& e) {
        log_error(e.what());
        return kExitConfig;
    } catch (const Error& e) {
        try {
            json j{{"error", e.code()}, {"detail", e.what()}};
            if (auto* nc = dynamic_cast<const NoConvergence*>(&e)) {
                j["iterations"] = nc->iterations;
                j["residual_norm"] = nc->residual_norm;
            }
            write_json_file(out_path(opts, "error.json"), j);
        } catch (...) {
            // the error report is best-effort; the exit code still signals
        }
        log_error(e.what());
        return kExitMath;
    } catch (const std::exception& e) {
        log_error(std::string("unexpected failure: ") + e.what());
        return kExitMath;
    }
}

}  // namespace equilibra::cli
