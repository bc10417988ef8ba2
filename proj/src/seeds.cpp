#include "equilibra/seeds.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace equilibra {

namespace {

// sign-change bisection with automatic bracket expansion from an initial
// guess; g must be continuous with a single sign change in the search range
double bisect(const std::function<double(double)>& g, double lo, double hi,
              const char* what) {
    double glo = g(lo), ghi = g(hi);
    for (int tries = 0; glo * ghi > 0 && tries < 200; ++tries) {
        if (std::abs(glo) < std::abs(ghi)) {
            lo /= 2;
            glo = g(lo);
        } else {
            hi *= 2;
            ghi = g(hi);
        }
    }
    if (glo == 0) return lo;
    if (ghi == 0) return hi;
    if (glo * ghi > 0)
        throw ConfigError(std::string("could not bracket the ") + what + " root");
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (gm == 0) return mid;
        (gm * glo < 0 ? hi : lo) = mid;
        (gm * glo < 0 ? ghi : glo) = gm;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

RotationGenerator planar_rotation(double omega, const SpaceForm& space) {
    if (!(omega > 0)) throw ConfigError("rotation speed must be positive");
    const int dim = space.ambient_dim();
    if (dim < 2) throw DimensionMismatch("planar rotation needs an ambient dimension >= 2");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
    G(0, 1) = -omega;
    G(1, 0) = omega;
    return validate_generator(G, space);
}

SeedResult seed_two_body(double m1, double m2, double omega, const ForceLaw& law) {
    if (!(m1 > 0) || !(m2 > 0)) throw ConfigError("masses must be positive");
    if (!(omega > 0)) throw ConfigError("omega must be positive");
    const double M = m1 + m2;
    double d = bisect([&](double x) { return M * law.eval(x) - omega * omega; }, 0.5, 2.0,
                      "two-body separation");

    SeedResult seed;
    seed.problem.space = SpaceForm::flat(2);
    seed.problem.masses = {m1, m2};
    seed.problem.law = law;
    seed.problem.gen = planar_rotation(omega, seed.problem.space);
    seed.positions = {Eigen::Vector2d(m2 / M * d, 0), Eigen::Vector2d(-m1 / M * d, 0)};
    return seed;
}

SeedResult seed_lagrange(double m1, double m2, double m3, double side,
                         const ForceLaw& law) {
    if (!(m1 > 0) || !(m2 > 0) || !(m3 > 0)) throw ConfigError("masses must be positive");
    if (!(side > 0)) throw ConfigError("side length must be positive");
    const double M = m1 + m2 + m3;
    double omega2 = M * law.eval(side);
    if (!(omega2 > 0))
        throw ConfigError("law is repulsive at the requested side; no rotation balances it");

    std::vector<Eigen::VectorXd> P = {
        Eigen::Vector2d(0, 0), Eigen::Vector2d(side, 0),
        Eigen::Vector2d(side / 2, side * std::sqrt(3.0) / 2)};
    Eigen::Vector2d centroid = (m1 * P[0] + m2 * P[1] + m3 * P[2]) / M;
    for (auto& p : P) p -= centroid;

    SeedResult seed;
    seed.problem.space = SpaceForm::flat(2);
    seed.problem.masses = {m1, m2, m3};
    seed.problem.law = law;
    seed.problem.gen = planar_rotation(std::sqrt(omega2), seed.problem.space);
    seed.positions = std::move(P);
    return seed;
}

SeedResult seed_euler_collinear(double m1, double m2, double m3, double r12) {
    if (!(m1 > 0) || !(m2 > 0) || !(m3 > 0)) throw ConfigError("masses must be positive");
    if (!(r12 > 0)) throw ConfigError("r12 must be positive");

    // ordering 1-2-3 on the line with unit gap 1-2 and gap ratio chi = r23/r12;
    // eliminating the common rotation strength omega^2 between the body-1/2
    // and body-2/3 equations leaves one scalar equation in chi
    auto quintic = [&](double chi) {
        double w2 = m1 + m2 - m3 / (chi * chi) + m3 / ((1 + chi) * (1 + chi));
        double rhs = m1 / ((1 + chi) * (1 + chi)) + (m2 + m3) / (chi * chi) - m1;
        return chi * w2 - rhs;
    };
    double chi = bisect(quintic, 0.5, 2.0, "collinear spacing-ratio");

    double omega2_unit = m1 + m2 - m3 / (chi * chi) + m3 / ((1 + chi) * (1 + chi));
    if (!(omega2_unit > 0))
        throw ConfigError("collinear balance produced a nonpositive rotation strength");
    double omega2 = omega2_unit / (r12 * r12 * r12);

    const double M = m1 + m2 + m3;
    std::vector<Eigen::VectorXd> P = {Eigen::Vector2d(0, 0), Eigen::Vector2d(r12, 0),
                                      Eigen::Vector2d(r12 * (1 + chi), 0)};
    Eigen::Vector2d centroid = (m1 * P[0] + m2 * P[1] + m3 * P[2]) / M;
    for (auto& p : P) p -= centroid;

    SeedResult seed;
    seed.problem.space = SpaceForm::flat(2);
    seed.problem.masses = {m1, m2, m3};
    seed.problem.law = ForceLaw::newtonian();
    seed.problem.gen = planar_rotation(std::sqrt(omega2), seed.problem.space);
    seed.positions = std::move(P);
    return seed;
}

SeedResult seed_sphere_lagrange(double mass, double z0) {
    if (!(mass > 0)) throw ConfigError("mass must be positive");
    if (!(std::abs(z0) > 0) || !(std::abs(z0) < 1))
        throw ConfigError("z0 must satisfy 0 < |z0| < 1 (the equator leaves omega free)");

    const double rho2 = 1 - z0 * z0;
    const double rho = std::sqrt(rho2);
    const double a = z0 * z0 - rho2 / 2;  // pairwise product Q_i(.)Q_j
    const double omega2 = 2 * mass * (1 - a) / (rho2 * std::pow(1 - a * a, 1.5));

    std::vector<Eigen::VectorXd> P;
    for (int i = 0; i < 3; ++i) {
        double phi = 2 * M_PI * i / 3;
        P.push_back(Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z0));
    }

    SeedResult seed;
    seed.problem.space = SpaceForm::sphere(2);
    seed.problem.masses = {mass, mass, mass};
    seed.problem.gen = planar_rotation(std::sqrt(omega2), seed.problem.space);
    seed.positions = std::move(P);
    return seed;
}

SeedResult seed_hyperbolic_pair(double mass, double x) {
    if (!(mass > 0)) throw ConfigError("mass must be positive");
    if (!(x > 0)) throw ConfigError("x must be positive");

    const double w = std::sqrt(1 + x * x);
    const double omega2 = mass / (4 * x * x * x * w * w * w);

    SeedResult seed;
    seed.problem.space = SpaceForm::hyperboloid(2);
    seed.problem.masses = {mass, mass};
    seed.problem.gen = planar_rotation(std::sqrt(omega2), seed.problem.space);
    seed.positions = {Eigen::Vector3d(x, 0, w), Eigen::Vector3d(-x, 0, w)};
    return seed;
}

}  // namespace equilibra
