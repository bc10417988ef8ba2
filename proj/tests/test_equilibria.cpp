#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "equilibra/equilibria.hpp"
#include "equilibra/seeds.hpp"
#include "oracle_helpers.hpp"

using namespace equilibra;

namespace {

std::vector<double> linspace(double from, double to, int points) {
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = from + (to - from) * i / std::max(points - 1, 1);
    return grid;
}

std::vector<double> triangle_sides(const std::vector<Eigen::VectorXd>& Q) {
    return {(Q[0] - Q[1]).norm(), (Q[1] - Q[2]).norm(), (Q[0] - Q[2]).norm()};
}

}  // namespace

TEST_CASE("flat residual vanishes on hand-built equilibria") {
    // pair at distance d with omega^2 = 2m/d^3
    const double d = 1.3, m = 1.0;
    REProblem pair;
    pair.space = SpaceForm::flat(2);
    pair.masses = {m, m};
    pair.law = ForceLaw::newtonian();
    pair.gen = planar_rotation(std::sqrt(2 * m / (d * d * d)), pair.space);
    std::vector<Eigen::VectorXd> Q = {Eigen::Vector2d(d / 2, 0), Eigen::Vector2d(-d / 2, 0)};
    CHECK(residual_flat(Q, pair).norm() < 1e-12);

    // equilateral triangle with omega^2 = 3m/d^3, centroid at the origin
    SeedResult tri = seed_lagrange(1.0, 1.0, 1.0, 1.0);
    CHECK(residual_flat(tri.positions, tri.problem).norm() < 1e-12);

    // detuning omega by 10% leaves a visible residual
    REProblem off = tri.problem;
    off.gen = planar_rotation(1.1 * std::sqrt(tri.problem.gen.c2()), off.space);
    double scale = residual_flat(tri.positions, tri.problem).size();
    CHECK(residual_flat(tri.positions, off).norm() > 1e-3 * scale);
}

TEST_CASE("curved residual vanishes on the closed-form seeds") {
    SeedResult lat = seed_sphere_lagrange(1.0, 0.45);
    double expected_omega2 = oracle::sphere_latitude_omega2(1.0, 0.45);
    CHECK(lat.problem.gen.c2() == doctest::Approx(expected_omega2).epsilon(1e-12));
    CHECK(residual_curved(lat.positions, lat.problem).norm() < 1e-10);

    SeedResult pair = seed_hyperbolic_pair(1.0, 0.8);
    CHECK(pair.problem.gen.c2() ==
          doctest::Approx(oracle::hyperbolic_pair_omega2(1.0, 0.8)).epsilon(1e-12));
    CHECK(residual_curved(pair.positions, pair.problem).norm() < 1e-10);

    // antipodal pair: singular kernel
    REProblem bad = lat.problem;
    bad.masses = {1.0, 1.0};
    std::vector<Eigen::VectorXd> anti = {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, -1)};
    CHECK_THROWS_AS(residual_curved(anti, bad), AntipodalOrCoincidentSingularity);
}

TEST_CASE("analytic flat Jacobian matches finite differences") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    REProblem problem;
    problem.space = SpaceForm::flat(2);
    problem.masses = {1.0, 2.0, 0.6};
    problem.law = ForceLaw::quasi_homogeneous(1, 2, 1, 3);
    problem.gen = planar_rotation(1.1, problem.space);

    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Eigen::VectorXd> Q;
        for (int i = 0; i < 3; ++i)
            Q.push_back(Eigen::Vector2d(gauss(rng) + 2.5 * i, gauss(rng)));
        Eigen::MatrixXd J = jacobian(Q, problem);
        Eigen::MatrixXd Jfd = oracle::fd_jacobian(Q, problem, 1e-6);
        double scale = J.cwiseAbs().maxCoeff();
        CHECK((J - Jfd).cwiseAbs().maxCoeff() < 1e-6 * scale);
    }
}

TEST_CASE("unfixed Jacobian has exactly the rotational null direction") {
    SeedResult seed = seed_two_body(1.0, 1.0, 1.0);
    Eigen::MatrixXd J = jacobian(seed.positions, seed.problem);

    std::vector<Eigen::VectorXd> rot;
    for (const auto& q : seed.positions) rot.push_back(seed.problem.gen.G() * q);
    Eigen::VectorXd null_dir = stack_positions(rot);
    CHECK((J * null_dir).norm() < 1e-10 * J.norm() * null_dir.norm());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    CHECK(sv(sv.size() - 1) < 1e-10 * sv(0));      // the rotation direction
    CHECK(sv(sv.size() - 2) > 1e-6 * sv(0));       // and nothing else
}

TEST_CASE("newton_solve recovers the Lagrange equilibrium from a scaled seed") {
    SeedResult seed = seed_lagrange(1.0, 1.0, 1.0, 1.0);
    std::vector<Eigen::VectorXd> Q0;
    for (const auto& q : seed.positions) Q0.push_back(1.05 * q);

    RESolution sol = newton_solve(seed.problem, Q0);
    CHECK(sol.residual_norm < 1e-10);
    CHECK(sol.newton_iterations <= 12);

    double omega2 = seed.problem.gen.c2();
    double side_oracle = std::cbrt(3.0 / omega2);
    for (double side : triangle_sides(sol.positions))
        CHECK(side == doctest::Approx(side_oracle).epsilon(1e-8));
    REQUIRE(sol.centroid_residual.has_value());
    CHECK(*sol.centroid_residual < 1e-10);
}

TEST_CASE("newton_solve lands on the Euler quintic ratio") {
    for (auto [m1, m2, m3] : {std::array{1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}}) {
        SeedResult seed = seed_euler_collinear(m1, m2, m3);
        std::vector<Eigen::VectorXd> Q0;
        for (const auto& q : seed.positions)
            Q0.push_back(1.1 * q + Eigen::Vector2d(0.01, 0.0));

        RESolution sol = newton_solve(seed.problem, Q0);
        CHECK(sol.residual_norm < 1e-11);

        // bodies stay ordered on a line; the spacing ratio is gauge-free
        double r12 = (sol.positions[0] - sol.positions[1]).norm();
        double r23 = (sol.positions[1] - sol.positions[2]).norm();
        double expected = oracle::euler_collinear_ratio(m1, m2, m3);
        CHECK(r23 / r12 == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("degenerate starting points are rejected") {
    SeedResult seed = seed_two_body(1.0, 1.0, 1.0);

    std::vector<Eigen::VectorXd> coincident = {Eigen::Vector2d(0.3, 0),
                                               Eigen::Vector2d(0.3, 0)};
    CHECK_THROWS_AS(newton_solve(seed.problem, coincident), CollisionSingularity);

    // Q_1 at the rotation center leaves no phase to pin
    std::vector<Eigen::VectorXd> centered = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
    CHECK_THROWS_AS(newton_solve(seed.problem, centered), GaugeConflict);

    SolveOptions strict;
    strict.max_iter = 1;
    std::vector<Eigen::VectorXd> far = {Eigen::Vector2d(3.0, 1.0), Eigen::Vector2d(-2.0, -1.5)};
    CHECK_THROWS_AS(newton_solve(seed.problem, far, strict), NoConvergence);
}

TEST_CASE("newton_solve is deterministic") {
    SeedResult seed = seed_lagrange(1.0, 2.0, 3.0, 1.0);
    std::vector<Eigen::VectorXd> Q0;
    for (const auto& q : seed.positions) Q0.push_back(1.08 * q);

    RESolution a = newton_solve(seed.problem, Q0);
    RESolution b = newton_solve(seed.problem, Q0);
    CHECK(a.newton_iterations == b.newton_iterations);
    for (size_t i = 0; i < a.positions.size(); ++i) {
        REQUIRE(a.positions[i].size() == b.positions[i].size());
        CHECK(std::memcmp(a.positions[i].data(), b.positions[i].data(),
                          sizeof(double) * a.positions[i].size()) == 0);
    }
}

TEST_CASE("verify reports equilibria and their diagnostics") {
    SeedResult seed = seed_two_body(1.0, 1.0, 1.0);
    VerifyReport report = verify(seed.positions, seed.problem, 1e-8);
    CHECK(report.is_re);
    double d = (seed.positions[0] - seed.positions[1]).norm();
    CHECK(report.min_separation == doctest::Approx(d).epsilon(1e-12));
    CHECK(report.max_norm == doctest::Approx(d / 2).epsilon(1e-12));

    // the residual is equivariant under the rotation family itself
    Eigen::MatrixXd T = group_element(seed.problem.gen, 1.7);
    std::vector<Eigen::VectorXd> moved;
    for (const auto& q : seed.positions) moved.push_back(T * q);
    CHECK(verify(moved, seed.problem, 1e-8).is_re);

    std::vector<Eigen::VectorXd> random = {Eigen::Vector2d(0.9, 0.4),
                                           Eigen::Vector2d(-0.2, 1.1)};
    CHECK_FALSE(verify(random, seed.problem, 1e-8).is_re);

    // singular input degrades to a diagnostic, not an exception
    std::vector<Eigen::VectorXd> coincident = {Eigen::Vector2d(0.5, 0),
                                               Eigen::Vector2d(0.5, 0)};
    VerifyReport broken = verify(coincident, seed.problem, 1e-8);
    CHECK_FALSE(broken.is_re);
    CHECK_FALSE(broken.diagnostic.empty());
}

TEST_CASE("residual equivariance under commuting isometries") {
    // flat: rotations in the plane of G commute with A
    SeedResult flat = seed_lagrange(1.0, 2.0, 0.7, 1.0);
    std::vector<Eigen::VectorXd> Q;
    for (const auto& q : flat.positions)
        Q.push_back(q + Eigen::Vector2d(0.05, -0.03));  // generic, not an RE
    Eigen::MatrixXd T = group_element(flat.problem.gen, 0.6);
    std::vector<Eigen::VectorXd> TQ;
    for (const auto& q : Q) TQ.push_back(T * q);

    Eigen::VectorXd R = residual_flat(Q, flat.problem);
    Eigen::VectorXd RT = residual_flat(TQ, flat.problem);
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd mapped = T * R.segment(2 * i, 2);
        CHECK((RT.segment(2 * i, 2) - mapped).norm() < 1e-11 * (1 + R.norm()));
    }

    // curved: the polar rotation commutes with the polar generator
    SeedResult lat = seed_sphere_lagrange(1.0, 0.35);
    Eigen::MatrixXd S = group_element(lat.problem.gen, 2.2);
    std::vector<Eigen::VectorXd> SQ;
    for (const auto& q : lat.positions) SQ.push_back(S * q);
    Eigen::VectorXd Rc = residual_curved(lat.positions, lat.problem);
    Eigen::VectorXd RcS = residual_curved(SQ, lat.problem);
    const int n = 3, dim = 3;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd mapped = S * Rc.segment(dim * i, dim);
        CHECK((RcS.segment(dim * i, dim) - mapped).norm() < 1e-11 * (1 + Rc.norm()));
    }
    // constraint rows are invariant scalars
    CHECK((RcS.tail(n) - Rc.tail(n)).norm() < 1e-11);
}

TEST_CASE("mass-weighted residual sum collapses to the centroid term") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    REProblem problem;
    problem.space = SpaceForm::flat(2);
    problem.masses = {1.0, 2.0, 0.5};
    problem.law = ForceLaw::newtonian();
    problem.gen = planar_rotation(0.9, problem.space);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Eigen::VectorXd> Q;
        for (int i = 0; i < 3; ++i)
            Q.push_back(Eigen::Vector2d(gauss(rng) + 2 * i, gauss(rng)));
        Eigen::VectorXd R = residual_flat(Q, problem);

        Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (int i = 0; i < 3; ++i) {
            weighted += problem.masses[i] * Eigen::Vector2d(R.segment(2 * i, 2));
            centroid += problem.masses[i] * Eigen::Vector2d(Q[i]);
        }
        Eigen::Vector2d expected = problem.gen.A() * centroid;
        CHECK((weighted - expected).norm() < 1e-12 * (1 + R.norm()));
    }
}

TEST_CASE("curved solutions respect the manifold constraint") {
    SeedResult seed = seed_sphere_lagrange(1.0, 0.6);
    std::vector<Eigen::VectorXd> Q0;
    for (const auto& q : seed.positions)
        Q0.push_back((q + Eigen::Vector3d(0.01, -0.02, 0.015)).normalized());
    RESolution sol = newton_solve(seed.problem, Q0);
    CHECK(sol.residual_norm < 1e-10);
    for (const auto& q : sol.positions)
        CHECK(std::abs(inner(q, q, seed.problem.space) - 1.0) <= 1e-10);
}

TEST_CASE("apply_parameter rebuilds the problem along each axis") {
    SeedResult seed = seed_two_body(1.0, 1.0, 1.0);

    REProblem fast = apply_parameter(seed.problem, {ContinuationParameterKind::Omega, 0}, 2.0);
    CHECK(fast.gen.c2() == doctest::Approx(4.0).epsilon(1e-12));

    REProblem heavier =
        apply_parameter(seed.problem, {ContinuationParameterKind::MassIndex, 1}, 2.5);
    CHECK(heavier.masses[1] == 2.5);
    CHECK(heavier.masses[0] == 1.0);

    REProblem qh = seed.problem;
    qh.law = ForceLaw::quasi_homogeneous(1, 2, 1, 3);
    REProblem alpha =
        apply_parameter(qh, {ContinuationParameterKind::ExponentAlpha, 0}, 2.5);
    CHECK(alpha.law->alpha() == doctest::Approx(2.5));
    CHECK(alpha.law->beta() == doctest::Approx(3.0));
}

TEST_CASE("two-body continuation tracks the closed-form branch") {
    SeedResult seed = seed_two_body(1.0, 1.0, 0.5);
    ContinuationFamily family =
        continue_family(seed.problem, seed.positions,
                        {ContinuationParameterKind::Omega, 0}, linspace(0.5, 2.0, 20));
    CHECK(family.complete);
    REQUIRE(family.steps.size() == 20);
    for (const auto& step : family.steps) {
        double expected = oracle::two_body_separation(2.0, step.param_value);
        CHECK(step.min_separation == doctest::Approx(expected).epsilon(1e-8));
        CHECK(step.solution.residual_norm < 1e-10);
    }
}

TEST_CASE("Lagrange equilibria stay equilateral across the mass sweep") {
    SeedResult seed = seed_lagrange(1.0, 1.0, 0.1, 1.0);
    ContinuationFamily family =
        continue_family(seed.problem, seed.positions,
                        {ContinuationParameterKind::MassIndex, 2}, linspace(0.1, 10.0, 20));
    CHECK(family.complete);
    REQUIRE(family.steps.size() == 20);
    double omega2 = seed.problem.gen.c2();
    for (const auto& step : family.steps) {
        CHECK(verify(step.solution.positions,
                     apply_parameter(seed.problem, family.parameter, step.param_value), 1e-9)
                  .is_re);
        auto sides = triangle_sides(step.solution.positions);
        double spread = std::max({sides[0], sides[1], sides[2]}) -
                        std::min({sides[0], sides[1], sides[2]});
        CHECK(spread < 1e-8);
        double expected = std::cbrt((2.0 + step.param_value) / omega2);
        CHECK(sides[0] == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("degenerate continuation inputs") {
    SeedResult seed = seed_two_body(1.0, 1.0, 1.0);

    ContinuationFamily single = continue_family(seed.problem, seed.positions,
                                                {ContinuationParameterKind::Omega, 0}, {1.0});
    CHECK(single.complete);
    REQUIRE(single.steps.size() == 1);
    for (size_t i = 0; i < seed.positions.size(); ++i)
        CHECK((single.steps[0].solution.positions[i] - seed.positions[i]).norm() < 1e-10);

    // a seed the corrector cannot rescue at the first grid point is refused
    std::vector<Eigen::VectorXd> coincident{seed.positions[0], seed.positions[0]};
    CHECK_THROWS_AS(continue_family(seed.problem, coincident,
                                    {ContinuationParameterKind::Omega, 0}, {1.0, 1.1}),
                    UnverifiedMember);
}
