// Acceptance battery: nine pinned criteria, one pass/fail line each, exit
// code = number of failures. Each criterion carries its own runtime budget;
// exceeding it fails the criterion even when the assertions hold.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "equilibra/certify.hpp"
#include "equilibra/config.hpp"
#include "equilibra/dynamics.hpp"
#include "equilibra/equilibria.hpp"
#include "equilibra/seeds.hpp"
#include "oracle_helpers.hpp"

using namespace equilibra;

namespace {

struct Failure {
    std::string detail;
};

void require(bool ok, const std::string& detail) {
    if (!ok) throw Failure{detail};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> linspace(double from, double to, int points) {
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = from + (to - from) * i / std::max(points - 1, 1);
    return grid;
}

std::vector<double> geometric(double from, double to, int points) {
    std::vector<double> grid(points);
    double ratio = std::log(to / from);
    for (int i = 0; i < points; ++i)
        grid[i] = from * std::exp(ratio * i / (points - 1));
    return grid;
}

// 1. the two-body branch d(omega) against the closed form, residuals pinned
void criterion_two_body_branch() {
    SeedResult seed = seed_two_body(1.0, 1.0, 0.5);
    ContinuationFamily family =
        continue_family(seed.problem, seed.positions,
                        {ContinuationParameterKind::Omega, 0}, linspace(0.5, 2.0, 20));
    require(family.complete, "continuation aborted: " + family.abort_reason);
    require(family.steps.size() == 20, "expected 20 family members");
    for (const auto& step : family.steps) {
        double expected = oracle::two_body_separation(2.0, step.param_value);
        require(std::abs(step.min_separation - expected) < 1e-8,
                "separation off at omega " + fmt(step.param_value) + ": " +
                    fmt(step.min_separation) + " vs " + fmt(expected));
        require(step.solution.residual_norm < 1e-10,
                "residual " + fmt(step.solution.residual_norm) + " at omega " +
                    fmt(step.param_value));
    }
}

// 2. Lagrange: converge from a 1.05x seed, then hold the equilateral shape
//    across the mass-ratio sweep
void criterion_lagrange() {
    SeedResult seed = seed_lagrange(1.0, 1.0, 1.0, 1.0);
    std::vector<Eigen::VectorXd> Q0;
    for (const auto& q : seed.positions) Q0.push_back(1.05 * q);
    RESolution sol = newton_solve(seed.problem, Q0);
    require(sol.residual_norm < 1e-10, "solver residual " + fmt(sol.residual_norm));

    double omega2 = seed.problem.gen.c2();
    double sides[3] = {(sol.positions[0] - sol.positions[1]).norm(),
                       (sol.positions[1] - sol.positions[2]).norm(),
                       (sol.positions[0] - sol.positions[2]).norm()};
    for (double d : sides)
        require(std::abs(omega2 - 3.0 / (d * d * d)) < 1e-8,
                "omega^2 " + fmt(omega2) + " vs mass-sum oracle " + fmt(3.0 / (d * d * d)));

    SeedResult wide = seed_lagrange(1.0, 1.0, 0.1, 1.0);
    ContinuationFamily family =
        continue_family(wide.problem, wide.positions,
                        {ContinuationParameterKind::MassIndex, 2}, linspace(0.1, 10.0, 20));
    require(family.complete, "mass sweep aborted: " + family.abort_reason);
    for (const auto& step : family.steps) {
        const auto& Q = step.solution.positions;
        double a = (Q[0] - Q[1]).norm(), b = (Q[1] - Q[2]).norm(), c = (Q[0] - Q[2]).norm();
        double spread = std::max({a, b, c}) - std::min({a, b, c});
        require(spread < 1e-8,
                "side spread " + fmt(spread) + " at m3 " + fmt(step.param_value));
    }
}

// 3. Euler's collinear configuration against an independent root-find
void criterion_euler() {
    const double mass_sets[2][3] = {{1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}};
    for (const auto& m : mass_sets) {
        SeedResult seed = seed_euler_collinear(m[0], m[1], m[2]);
        std::vector<Eigen::VectorXd> Q0;
        for (const auto& q : seed.positions)
            Q0.push_back(1.1 * q + Eigen::Vector2d(0.01, 0.0));
        RESolution sol = newton_solve(seed.problem, Q0);
        double r12 = (sol.positions[0] - sol.positions[1]).norm();
        double r23 = (sol.positions[1] - sol.positions[2]).norm();
        double expected = oracle::euler_collinear_ratio(m[0], m[1], m[2]);
        require(std::abs(r23 / r12 - expected) < 1e-9,
                "spacing ratio " + fmt(r23 / r12) + " vs quintic root " + fmt(expected));
    }
}

// 4. accepted equilibria rotate rigidly for ten periods. The battery uses
//    dynamically stable members; linearly unstable orbits (the equal-mass
//    triangle, mid-latitude sphere triangles) amplify roundoff exponentially
//    and cannot hold any drift bound over this horizon.
void criterion_rigidity() {
    struct Member {
        const char* name;
        SeedResult seed;
    };
    std::vector<Member> members;
    members.push_back({"flat pair", seed_two_body(1.0, 1.0, 1.0)});
    members.push_back({"flat collinear", seed_euler_collinear(1.0, 1.0, 1.0)});
    members.push_back({"sphere triangle z0=0.2", seed_sphere_lagrange(1.0, 0.2)});
    members.push_back({"sphere triangle z0=0.8", seed_sphere_lagrange(1.0, 0.8)});
    members.push_back({"hyperboloid pair", seed_hyperbolic_pair(1.0, 0.5)});

    for (const auto& member : members) {
        RESolution sol = newton_solve(member.seed.problem, member.seed.positions);
        require(sol.residual_norm < 1e-12,
                std::string(member.name) + ": not accepted, residual " +
                    fmt(sol.residual_norm));

        PhaseState state;
        state.config.space = member.seed.problem.space;
        state.config.masses = member.seed.problem.masses;
        state.config.positions = sol.positions;
        for (const auto& q : sol.positions)
            state.velocities.push_back(member.seed.problem.gen.G() * q);

        double period = 2 * M_PI / std::sqrt(member.seed.problem.gen.c2());
        Trajectory traj =
            state.config.space.curved()
                ? integrate(state, 10 * period, 1e-10)
                : integrate(state, *member.seed.problem.law, 10 * period, 1e-10);

        double drift = rigidity_report(traj);
        require(drift < 1e-6, std::string(member.name) + ": shape drift " + fmt(drift));
        if (state.config.space.curved())
            require(traj.max_constraint_drift < 1e-9,
                    std::string(member.name) + ": constraint drift " +
                        fmt(traj.max_constraint_drift));
    }
}

// 5. the near-collision demand on the rotation bound: dominant slope and
//    bounded far-body terms on both kernels
void criterion_divergence_probe() {
    RotationGenerator gen = planar_rotation(1.0, SpaceForm::flat(2));
    ShrinkPath path = [](double s) {
        return std::vector<Eigen::VectorXd>{Eigen::Vector2d(s, 0), Eigen::Vector2d(0, 0),
                                            Eigen::Vector2d(0.7, 1.9)};
    };
    std::vector<double> grid = geometric(1e-1, 1e-4, 25);

    for (const ForceLaw& law :
         {ForceLaw::newtonian(), ForceLaw::quasi_homogeneous(1, 2, 1, 3)}) {
        DivergenceProbeResult result =
            collision_divergence_probe({1.0, 1.0, 1.0}, gen, law, path, grid);
        require(std::abs(result.slope + 3.0) <= 0.05,
                law.name() + ": slope " + fmt(result.slope) + " outside -3 +/- 0.05");
        require(result.triangle_ratio_max <= 1 + 1e-12,
                law.name() + ": triangle ratio " + fmt(result.triangle_ratio_max));
        double band = 10 * std::abs(result.remainder.front());
        for (double r : result.remainder)
            require(std::abs(r) < band, law.name() + ": far-body term " + fmt(r) +
                                            " left the band " + fmt(band));
        require(result.required_bound.back() > 1e6,
                law.name() + ": demand " + fmt(result.required_bound.back()) +
                    " never exceeded 1e6");
    }
}

// 6. the pair-collection identity on random configurations; the sphere must
//    accept both denominator readings, isolating the ambiguity to sigma = -1
void criterion_cluster_identity() {
    std::mt19937_64 rng(20260815);
    std::uniform_int_distribution<int> body_count(2, 6);
    std::uniform_real_distribution<double> mass(0.5, 2.0);

    double hyper_alt_max = 0;
    for (int sigma : {+1, -1}) {
        SpaceForm space = sigma > 0 ? SpaceForm::sphere(2) : SpaceForm::hyperboloid(2);
        for (int trial = 0; trial < 100; ++trial) {
            int n = body_count(rng);
            std::vector<Eigen::VectorXd> Q = sigma > 0
                                                 ? oracle::random_sphere_config(rng, n)
                                                 : oracle::random_hyperboloid_config(rng, n);
            std::vector<double> masses;
            std::vector<int> cluster;
            for (int i = 0; i < n; ++i) {
                masses.push_back(mass(rng));
                cluster.push_back(i);
            }
            ClusterIdentityResult res = curved_cluster_identity(Q, masses, space, cluster);
            require(res.residual_rel < 1e-12,
                    "identity residual " + fmt(res.residual_rel) + " (sigma " +
                        fmt(sigma) + ", trial " + fmt(trial) + ")");
            if (sigma > 0)
                require(res.residual_rel_alt < 1e-12,
                        "sphere readings disagree: alt residual " +
                            fmt(res.residual_rel_alt));
            else
                hyper_alt_max = std::max(hyper_alt_max, res.residual_rel_alt);
        }
    }
    require(hyper_alt_max > 1e-6,
            "hyperboloid alt reading unexpectedly matched (max " + fmt(hyper_alt_max) + ")");
}

// 7. cluster collapse forces the summed equation past any fixed bound while
//    the far side stays banded, on both curvatures
void criterion_cluster_divergence() {
    std::vector<double> grid = geometric(1e-1, 2e-7, 25);

    RotationGenerator sphere_gen = planar_rotation(1.0, SpaceForm::sphere(2));
    ClusterPath sphere_path = [](double s) {
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

    RotationGenerator hyp_gen = planar_rotation(1.0, SpaceForm::hyperboloid(2));
    ClusterPath hyp_path = [](double s) {
        const double theta0 = 0.5;
        double delta = 0.5 * s / std::sqrt(std::cosh(2.0 * theta0));
        auto meridian = [](double th) {
            return (Eigen::VectorXd(3) << std::sinh(th), 0.0, std::cosh(th)).finished();
        };
        std::vector<Eigen::VectorXd> Q{meridian(theta0 - delta), meridian(theta0 + delta)};
        Q.push_back((Eigen::VectorXd(3) << 0.0, std::sinh(2.0), std::cosh(2.0)).finished());
        return Q;
    };

    struct Case {
        const char* name;
        RotationGenerator* gen;
        ClusterPath* path;
    };
    Case cases[2] = {{"sphere", &sphere_gen, &sphere_path},
                     {"hyperboloid", &hyp_gen, &hyp_path}};
    for (const auto& c : cases) {
        ClusterDivergenceResult result =
            curved_cluster_divergence({1.0, 1.0, 1.0}, *c.gen, {0, 1}, *c.path, 0.1, grid);
        require(result.s.back() < 1e-5 && result.rhs.back() > 1e6,
                std::string(c.name) + ": rhs " + fmt(result.rhs.back()) + " at gap " +
                    fmt(result.s.back()));
        require(std::abs(result.slope + 1.0) <= 0.1,
                std::string(c.name) + ": slope " + fmt(result.slope));
        require(std::isfinite(result.lhs_band_lo) && std::isfinite(result.lhs_band_hi),
                std::string(c.name) + ": far side band is not finite");
    }
}

// 8. boundedness gate: certified on the shipped omega sweep with the exact
//    closed-form bound, refused for the weak pure power
void criterion_boundedness_gate() {
    RunConfig cfg = load_config(std::string(EQUILIBRA_CONFIG_DIR) + "/sweep_two_body.json");
    require(cfg.seed_name && cfg.sweep && cfg.law, "shipped sweep config is incomplete");

    SeedResult seed = build_seed(*cfg.seed_name, cfg.seed_params, cfg.law);
    ContinuationFamily family = continue_family(
        seed.problem, seed.positions, cfg.sweep->parameter,
        linspace(cfg.sweep->from, cfg.sweep->to, cfg.sweep->points));
    require(family.complete, "shipped sweep aborted: " + family.abort_reason);

    BoundednessCertificate cert = boundedness_scan(family, *cfg.law);
    require(std::abs(cert.C_hat - 1.0) < 1e-6,
            "C_hat " + fmt(cert.C_hat) + " vs closed-form bound 1");

    bool refused = false;
    try {
        boundedness_scan(family, ForceLaw::quasi_homogeneous(1.0, 0.5, 0.0, 0.5));
    } catch (const HypothesisNotMet&) {
        refused = true;
    }
    require(refused, "weak pure power was not refused");
}

// 9. structural invariants: equivariance, emergent weighted centroid, the
//    exponential group law, isometry preservation, Jacobian agreement
void criterion_invariants() {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // residual equivariance under the rotation family, flat and curved
    SeedResult tri = seed_lagrange(1.0, 2.0, 0.7, 1.0);
    std::vector<Eigen::VectorXd> Q;
    for (const auto& q : tri.positions) Q.push_back(q + Eigen::Vector2d(0.05, -0.03));
    Eigen::MatrixXd T = group_element(tri.problem.gen, 0.6);
    std::vector<Eigen::VectorXd> TQ;
    for (const auto& q : Q) TQ.push_back(T * q);
    Eigen::VectorXd R = residual_flat(Q, tri.problem);
    Eigen::VectorXd RT = residual_flat(TQ, tri.problem);
    for (int i = 0; i < 3; ++i) {
        double gap = (RT.segment(2 * i, 2) - T * R.segment(2 * i, 2)).norm();
        require(gap < 1e-11 * (1 + R.norm()), "flat equivariance gap " + fmt(gap));
    }

    SeedResult lat = seed_sphere_lagrange(1.0, 0.35);
    Eigen::MatrixXd S = group_element(lat.problem.gen, 2.2);
    std::vector<Eigen::VectorXd> SQ;
    for (const auto& q : lat.positions) SQ.push_back(S * q);
    Eigen::VectorXd Rc = residual_curved(lat.positions, lat.problem);
    Eigen::VectorXd RcS = residual_curved(SQ, lat.problem);
    for (int i = 0; i < 3; ++i) {
        double gap = (RcS.segment(3 * i, 3) - S * Rc.segment(3 * i, 3)).norm();
        require(gap < 1e-11 * (1 + Rc.norm()), "curved equivariance gap " + fmt(gap));
    }

    // the weighted centroid condition emerges at accepted flat equilibria
    for (SeedResult seed : {seed_two_body(1.0, 1.0, 1.0), seed_lagrange(1.0, 2.0, 3.0, 1.0)}) {
        RESolution sol = newton_solve(seed.problem, seed.positions);
        Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
        for (size_t i = 0; i < sol.positions.size(); ++i)
            weighted += seed.problem.masses[i] * Eigen::Vector2d(sol.positions[i]);
        double centroid = (seed.problem.gen.A() * weighted).norm();
        require(centroid < 1e-10, "weighted centroid residual " + fmt(centroid));
        require(sol.centroid_residual && *sol.centroid_residual < 1e-10,
                "solution centroid diagnostic missing or large");
    }

    // group law of the exponential
    std::vector<RotationGenerator> gens;
    gens.push_back(planar_rotation(0.8, SpaceForm::flat(2)));
    gens.push_back(planar_rotation(2.1, SpaceForm::sphere(2)));
    gens.push_back(planar_rotation(1.3, SpaceForm::hyperboloid(2)));
    for (const auto& gen : gens) {
        for (auto [s, t] : {std::pair{0.3, 1.1}, {-0.7, 2.4}, {5.0, -5.0}}) {
            double gap = (group_element(gen, s + t) -
                          group_element(gen, s) * group_element(gen, t))
                             .cwiseAbs()
                             .maxCoeff();
            require(gap < 1e-10, "group law gap " + fmt(gap));
        }
    }

    // isometry preservation of the signed product
    for (int sigma : {+1, -1}) {
        SpaceForm space = sigma > 0 ? SpaceForm::sphere(2) : SpaceForm::hyperboloid(2);
        RotationGenerator gen = planar_rotation(1.7, space);
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::Vector3d x = sigma > 0 ? oracle::random_sphere_point(rng)
                                          : oracle::random_hyperboloid_point(rng);
            Eigen::Vector3d y = sigma > 0 ? oracle::random_sphere_point(rng)
                                          : oracle::random_hyperboloid_point(rng);
            Eigen::MatrixXd Tt = group_element(gen, 0.11 * trial - 3.0);
            double before = inner(x, y, space);
            double after = inner(Tt * x, Tt * y, space);
            require(std::abs(after - before) < 1e-12 * (1 + std::abs(before)),
                    "product drift " + fmt(after - before));
        }
    }

    // analytic Jacobian against finite differences
    REProblem problem;
    problem.space = SpaceForm::flat(2);
    problem.masses = {1.0, 2.0, 0.6};
    problem.law = ForceLaw::quasi_homogeneous(1, 2, 1, 3);
    problem.gen = planar_rotation(1.1, problem.space);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Eigen::VectorXd> P;
        for (int i = 0; i < 3; ++i)
            P.push_back(Eigen::Vector2d(gauss(rng) + 2.5 * i, gauss(rng)));
        Eigen::MatrixXd J = jacobian(P, problem);
        Eigen::MatrixXd Jfd = oracle::fd_jacobian(P, problem, 1e-6);
        double gap = (J - Jfd).cwiseAbs().maxCoeff() / J.cwiseAbs().maxCoeff();
        require(gap < 1e-6, "Jacobian disagreement " + fmt(gap));
    }
}

int run_criterion(int number, const std::string& label, double budget_s,
                  const std::function<void()>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
        body();
    } catch (const Failure& f) {
        failure = f.detail;
    } catch (const std::exception& e) {
        failure = std::string("unexpected exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failure.empty() && elapsed >= budget_s)
        failure = "runtime " + fmt(elapsed) + " s exceeded the " + fmt(budget_s) +
                  " s budget";

    std::printf("criterion %d %s  %-46s (%.2f s)\n", number,
                failure.empty() ? "PASS" : "FAIL", label.c_str(), elapsed);
    if (!failure.empty()) std::printf("  -> %s\n", failure.c_str());
    return failure.empty() ? 0 : 1;
}

}  // namespace

int main() {
    int failures = 0;
    failures += run_criterion(1, "two-body branch vs closed form", 5.0,
                              criterion_two_body_branch);
    failures += run_criterion(2, "Lagrange convergence and mass sweep", 30.0,
                              criterion_lagrange);
    failures += run_criterion(3, "Euler spacing vs quintic root-find", 5.0, criterion_euler);
    failures += run_criterion(4, "ten-period rigidity, flat and curved", 60.0,
                              criterion_rigidity);
    failures += run_criterion(5, "near-collision divergence probes", 10.0,
                              criterion_divergence_probe);
    failures += run_criterion(6, "pair-collection identity, both curvatures", 5.0,
                              criterion_cluster_identity);
    failures += run_criterion(7, "cluster collapse divergence probes", 10.0,
                              criterion_cluster_divergence);
    failures += run_criterion(8, "boundedness certificate gating", 5.0,
                              criterion_boundedness_gate);
    failures += run_criterion(9, "equivariance and structural invariants", 60.0,
                              criterion_invariants);

    if (failures == 0)
        std::printf("all 9 acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
