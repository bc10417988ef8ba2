#include "equilibra/geometry.hpp"

#include <cmath>
#include <string>

namespace equilibra {

namespace {

void require_ambient(const Eigen::VectorXd& x, const SpaceForm& space, const char* who) {
    if (x.size() != space.ambient_dim()) {
        throw DimensionMismatch(std::string(who) + ": vector has size " +
                                std::to_string(x.size()) + ", ambient dimension is " +
                                std::to_string(space.ambient_dim()));
    }
}

}  // namespace

SpaceForm SpaceForm::flat(int k) {
    if (k < 1) throw DimensionMismatch("flat space needs k >= 1");
    return SpaceForm{SpaceKind::Flat, k, 0};
}

SpaceForm SpaceForm::sphere(int k) {
    if (k < 2) throw DimensionMismatch("sphere needs k >= 2");
    return SpaceForm{SpaceKind::Sphere, k, +1};
}

SpaceForm SpaceForm::hyperboloid(int k) {
    if (k < 2) throw DimensionMismatch("hyperboloid needs k >= 2");
    return SpaceForm{SpaceKind::Hyperboloid, k, -1};
}

Eigen::MatrixXd SpaceForm::metric() const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(ambient_dim(), ambient_dim());
    if (curved()) J(k, k) = sigma;
    return J;
}

const char* to_string(SpaceKind kind) {
    switch (kind) {
        case SpaceKind::Flat: return "flat";
        case SpaceKind::Sphere: return "sphere";
        case SpaceKind::Hyperboloid: return "hyperboloid";
    }
    return "?";
}

double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const SpaceForm& space) {
    require_ambient(x, space, "inner");
    require_ambient(y, space, "inner");
    if (!space.curved()) return x.dot(y);
    return x.head(space.k).dot(y.head(space.k)) + space.sigma * x(space.k) * y(space.k);
}

bool on_manifold(const Eigen::VectorXd& x, const SpaceForm& space, double tol) {
    require_ambient(x, space, "on_manifold");
    if (!space.curved()) return true;
    return std::abs(inner(x, x, space) - space.sigma) <= tol;
}

void RotationGenerator::check_position(const Eigen::VectorXd& q) const {
    if (!restricted_) return;
    const double off = (q - range_projector_ * q).norm();
    if (off > 1e-10 * (1.0 + q.norm())) {
        throw OffInvariantSubspace("position leaves the subspace where A is definite (|off| = " +
                                   std::to_string(off) + ")");
    }
}

RotationGenerator validate_generator(const Eigen::MatrixXd& G, const SpaceForm& space,
                                     bool allow_singular) {
    const int d = space.ambient_dim();
    if (G.rows() != d || G.cols() != d) {
        throw DimensionMismatch("generator must be " + std::to_string(d) + "x" + std::to_string(d));
    }

    // Skewness with respect to the space's bilinear form: G^T J + J G = 0.
    const Eigen::MatrixXd J = space.metric();
    const double skew = (G.transpose() * J + J * G).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    if (skew > 1e-12 * scale) {
        throw NotSkew("generator is not skew for the " + std::string(to_string(space.kind)) +
                      " inner product (defect " + std::to_string(skew) + ")");
    }

    RotationGenerator gen;
    gen.G_ = G;
    gen.space_ = space;
    gen.A_ = -(G * G);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gen.A_, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    gen.c2_ = sv(0);
    gen.c1_ = sv(d - 1);
    gen.range_projector_ = Eigen::MatrixXd::Identity(d, d);

    if (space.kind == SpaceKind::Flat && gen.c1_ <= 1e-12 * std::max(1.0, gen.c2_)) {
        if (!allow_singular) {
            throw DegenerateRotation("A = -G^2 is singular; the lower rotation bound c1 > 0 fails");
        }
        if (gen.c2_ <= 0.0) {
            throw DegenerateRotation("A = -G^2 is identically zero; nothing to restrict to");
        }
        // Restrict to range(A): keep singular directions above the rank cutoff.
        const double cutoff = 1e-12 * gen.c2_;
        int rank = 0;
        while (rank < d && sv(rank) > cutoff) ++rank;
        const Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
        gen.range_projector_ = U * U.transpose();
        gen.restricted_ = true;
        gen.c1_ = sv(rank - 1);  // smallest singular value on the invariant subspace
    }
    return gen;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
    const int n = static_cast<int>(M.rows());
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();

    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Eigen::MatrixXd X = M / std::ldexp(1.0, squarings);

    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd sum = term;
    for (int j = 1; j <= 40; ++j) {
        term = (term * X) / static_cast<double>(j);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-13 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

Eigen::MatrixXd group_element(const RotationGenerator& gen, double t) {
    return expm(t * gen.G());
}

}  // namespace equilibra
