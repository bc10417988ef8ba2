#pragma once

#include <Eigen/Dense>
#include <vector>

#include "equilibra/equilibria.hpp"

namespace equilibra {

/// A ready-to-solve problem together with positions that already satisfy it
/// (to root-find accuracy), used as continuation seeds and test fixtures.
struct SeedResult {
    REProblem problem;
    std::vector<Eigen::VectorXd> positions;
};

/// Planar pair rotating at omega: separation d solves (m1+m2) f(d) = omega^2
/// (bisection), bodies on the x-axis with the weighted centroid at the origin.
SeedResult seed_two_body(double m1, double m2, double omega,
                         const ForceLaw& law = ForceLaw::newtonian());

/// Planar equilateral triangle of side `side`; for any masses the weighted
/// centroid sits at the origin and omega^2 = (m1+m2+m3) f(side).
SeedResult seed_lagrange(double m1, double m2, double m3, double side,
                         const ForceLaw& law = ForceLaw::newtonian());

/// Collinear three-body configuration for the inverse-cube kernel: bodies at
/// 0, r12, r12 (1+chi) on the x-axis (centered afterwards), where chi solves
///   chi [m1 + m2 - m3/chi^2 + m3/(1+chi)^2]
///     = m1/(1+chi)^2 + (m2+m3)/chi^2 - m1
/// (bisection) and omega^2 = (m1 + m2 - m3/chi^2 + m3/(1+chi)^2) / r12^3.
SeedResult seed_euler_collinear(double m1, double m2, double m3, double r12 = 1.0);

/// Three equal masses on the latitude circle z = z0 of the unit sphere at
/// equal longitudes, rotating about the polar axis with
/// omega^2 = 2 m (1-a) / (rho^2 (1-a^2)^{3/2}), a = Q_1(.)Q_2 = z0^2 - rho^2/2,
/// rho^2 = 1 - z0^2. Requires 0 < |z0| < 1 (the equator leaves omega free).
SeedResult seed_sphere_lagrange(double mass, double z0);

/// Two equal masses at (+/-x, 0, sqrt(1+x^2)) on the hyperboloid, rotating
/// about the vertical axis with omega^2 = m / (4 x^3 (1+x^2)^{3/2}).
SeedResult seed_hyperbolic_pair(double mass, double x);

/// Planar rotation generator embedded in the ambient space of `space`:
/// omega-speed rotation of the first two coordinates. Valid for flat k = 2,
/// the sphere, and the hyperboloid (where it is the elliptic isometry).
RotationGenerator planar_rotation(double omega, const SpaceForm& space);

}  // namespace equilibra
