#pragma once

#include <Eigen/Dense>

#include "equilibra/errors.hpp"

namespace equilibra {

enum class SpaceKind { Flat, Sphere, Hyperboloid };

/// Ambient-space descriptor: flat R^k, or the unit sphere / hyperboloid
///   { x in R^{k+1} : x_1^2 + ... + x_k^2 + sigma x_{k+1}^2 = sigma }
/// with sigma = +1 (sphere) or -1 (hyperboloid).
struct SpaceForm {
    SpaceKind kind = SpaceKind::Flat;
    int k = 0;      // manifold dimension
    int sigma = 0;  // +1 sphere, -1 hyperboloid, 0 flat

    static SpaceForm flat(int k);
    static SpaceForm sphere(int k);
    static SpaceForm hyperboloid(int k);

    bool curved() const { return kind != SpaceKind::Flat; }
    int ambient_dim() const { return curved() ? k + 1 : k; }

    /// Gram matrix of the ambient bilinear form (identity for flat/sphere
    /// ambient, diag(1,...,1,-1) for the hyperboloid ambient).
    Eigen::MatrixXd metric() const;

    bool operator==(const SpaceForm&) const = default;
};

const char* to_string(SpaceKind kind);

/// Signed inner product of the ambient space: the Euclidean dot product for
/// flat space, x_1 y_1 + ... + x_k y_k + sigma x_{k+1} y_{k+1} otherwise.
double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const SpaceForm& space);

/// True iff |x (.) x - sigma| <= tol; always true for flat space.
bool on_manifold(const Eigen::VectorXd& x, const SpaceForm& space, double tol);

/// Infinitesimal generator G of the one-parameter isometry family
/// T(t) = exp(tG), together with the derived operator A = -G^2 and its
/// singular-value bounds c1 <= |A x|/|x| <= c2.
class RotationGenerator {
public:
    const Eigen::MatrixXd& G() const { return G_; }
    const Eigen::MatrixXd& A() const { return A_; }
    const SpaceForm& space() const { return space_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }

    /// True when a flat generator with singular A was accepted via the
    /// allow_singular override; configurations must then stay inside range(A).
    bool restricted() const { return restricted_; }

    /// Orthogonal projector onto range(A); identity when unrestricted.
    const Eigen::MatrixXd& range_projector() const { return range_projector_; }

    /// Throws OffInvariantSubspace if a restricted generator is paired with a
    /// position outside range(A). No-op for unrestricted generators.
    void check_position(const Eigen::VectorXd& q) const;

private:
    friend RotationGenerator validate_generator(const Eigen::MatrixXd&, const SpaceForm&, bool);

    Eigen::MatrixXd G_, A_, range_projector_;
    SpaceForm space_;
    double c1_ = 0.0, c2_ = 0.0;
    bool restricted_ = false;
};

/// Checks that G is skew with respect to the space's inner product, computes
/// A = -G^2 and its bounds. Flat generators with singular A are rejected
/// unless allow_singular is set, in which case configurations are restricted
/// to the invariant subspace range(A).
RotationGenerator validate_generator(const Eigen::MatrixXd& G, const SpaceForm& space,
                                     bool allow_singular = false);

/// T(t) = exp(tG).
Eigen::MatrixXd group_element(const RotationGenerator& gen, double t);

/// Matrix exponential by scaling-and-squaring with a Taylor core; the series
/// is summed to 1e-13 relative and the squaring depth comes from the 1-norm.
Eigen::MatrixXd expm(const Eigen::MatrixXd& M);

}  // namespace equilibra
