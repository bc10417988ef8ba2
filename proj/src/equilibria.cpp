#include "equilibra/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace equilibra {

namespace {

constexpr double kPairGuard = 1e-14;

double pair_base(double sigma, double dot) { return sigma - sigma * dot * dot; }

void require_positions(const std::vector<Eigen::VectorXd>& Q, const REProblem& p) {
    if (static_cast<int>(Q.size()) != p.n())
        throw DimensionMismatch("position count does not match the problem");
    for (const auto& q : Q)
        if (q.size() != p.space.ambient_dim())
            throw DimensionMismatch("position dimension does not match the space");
}

double min_pair_distance(const std::vector<Eigen::VectorXd>& Q) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < Q.size(); ++i)
        for (size_t j = i + 1; j < Q.size(); ++j) d = std::min(d, (Q[i] - Q[j]).norm());
    return d;
}

double max_body_norm(const std::vector<Eigen::VectorXd>& Q) {
    double m = 0;
    for (const auto& q : Q) m = std::max(m, q.norm());
    return m;
}

}  // namespace

void REProblem::validate() const {
    if (n() < 2) throw ConfigError("problem needs at least 2 bodies");
    for (double m : masses)
        if (!(m > 0)) throw ConfigError("masses must be strictly positive");
    if (!(gen.space() == space))
        throw DimensionMismatch("generator was validated against a different space");
    if (!space.curved() && !law.has_value())
        throw ConfigError("flat problems need a force law");
}

Eigen::VectorXd stack_positions(const std::vector<Eigen::VectorXd>& Q) {
    if (Q.empty()) return Eigen::VectorXd();
    const int dim = static_cast<int>(Q[0].size());
    Eigen::VectorXd x(static_cast<int>(Q.size()) * dim);
    for (size_t i = 0; i < Q.size(); ++i) x.segment(i * dim, dim) = Q[i];
    return x;
}

std::vector<Eigen::VectorXd> unstack_positions(const Eigen::VectorXd& x, int n, int dim) {
    if (x.size() != n * dim) throw DimensionMismatch("stacked vector has the wrong length");
    std::vector<Eigen::VectorXd> Q(n);
    for (int i = 0; i < n; ++i) Q[i] = x.segment(i * dim, dim);
    return Q;
}

Eigen::VectorXd residual_flat(const std::vector<Eigen::VectorXd>& Q,
                              const REProblem& problem) {
    problem.validate();
    if (problem.space.curved())
        throw DimensionMismatch("residual_flat called with a curved space");
    require_positions(Q, problem);
    const int n = problem.n();
    const int dim = problem.space.ambient_dim();
    const ForceLaw& law = *problem.law;
    Eigen::VectorXd r(n * dim);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd ri = problem.gen.A() * Q[i];
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            Eigen::VectorXd u = Q[j] - Q[i];
            double d = u.norm();
            if (d < kPairGuard)
                throw CollisionSingularity("bodies " + std::to_string(i + 1) + " and " +
                                           std::to_string(j + 1) + " coincide");
            ri += problem.masses[j] * law.eval(d) * u;
        }
        r.segment(i * dim, dim) = ri;
    }
    return r;
}

Eigen::VectorXd curved_rotation_term(const RotationGenerator& gen,
                                     const Eigen::VectorXd& Q) {
    const SpaceForm& space = gen.space();
    Eigen::VectorXd gq = gen.G() * Q;
    return gen.G() * gq + space.sigma * inner(gq, gq, space) * Q;
}

Eigen::VectorXd residual_curved(const std::vector<Eigen::VectorXd>& Q,
                                const REProblem& problem) {
    problem.validate();
    if (!problem.space.curved())
        throw DimensionMismatch("residual_curved called with a flat space");
    require_positions(Q, problem);
    const int n = problem.n();
    const int dim = problem.space.ambient_dim();
    const double sigma = problem.space.sigma;
    for (int i = 0; i < n; ++i) {
        double dev = std::abs(inner(Q[i], Q[i], problem.space) - sigma);
        if (dev > 0.1)
            throw OffManifold("body " + std::to_string(i + 1) +
                              " is far off the manifold (|Q(.)Q - sigma| = " +
                              std::to_string(dev) + ")");
    }
    Eigen::VectorXd r(n * dim + n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd ri = -curved_rotation_term(problem.gen, Q[i]);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dot = inner(Q[i], Q[j], problem.space);
            double base = pair_base(sigma, dot);
            if (base < kPairGuard)
                throw AntipodalOrCoincidentSingularity(
                    "bodies " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                    " have a singular interaction denominator");
            ri += problem.masses[j] * (Q[j] - sigma * dot * Q[i]) / std::pow(base, 1.5);
        }
        r.segment(i * dim, dim) = ri;
        r(n * dim + i) = inner(Q[i], Q[i], problem.space) - sigma;
    }
    return r;
}

Eigen::VectorXd residual(const std::vector<Eigen::VectorXd>& Q, const REProblem& problem) {
    return problem.space.curved() ? residual_curved(Q, problem)
                                  : residual_flat(Q, problem);
}

Eigen::MatrixXd jacobian(const std::vector<Eigen::VectorXd>& Q, const REProblem& problem) {
    problem.validate();
    require_positions(Q, problem);
    const int n = problem.n();
    const int dim = problem.space.ambient_dim();
    const int N = n * dim;

    if (!problem.space.curved()) {
        const ForceLaw& law = *problem.law;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd diag = problem.gen.A();
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                Eigen::VectorXd u = Q[j] - Q[i];
                double d = u.norm();
                if (d < kPairGuard)
                    throw CollisionSingularity("bodies " + std::to_string(i + 1) +
                                               " and " + std::to_string(j + 1) +
                                               " coincide");
                double f = law.eval(d);
                double fp = law.eval_xfprime(d) / d;
                Eigen::MatrixXd block =
                    problem.masses[j] *
                    (f * Eigen::MatrixXd::Identity(dim, dim) + (fp / d) * u * u.transpose());
                J.block(i * dim, j * dim, dim, dim) = block;
                diag -= block;
            }
            J.block(i * dim, i * dim, dim, dim) = diag;
        }
        return J;
    }

    // curved: central finite differences on the stacked residual
    Eigen::VectorXd x = stack_positions(Q);
    const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 3.0) *
                     (1.0 + x.norm());
    Eigen::MatrixXd J(N + n, N);
    for (int c = 0; c < N; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        Eigen::VectorXd rp = residual_curved(unstack_positions(xp, n, dim), problem);
        Eigen::VectorXd rm = residual_curved(unstack_positions(xm, n, dim), problem);
        J.col(c) = (rp - rm) / (2 * h);
    }
    return J;
}

namespace {

// Pin the coordinate of Q_1 that best cuts the rotational null direction
// (G Q_1, ..., G Q_n): among coordinates where G Q_1 has a meaningful
// component, take the largest-magnitude entry of Q_1, breaking ties toward
// the larger component of G Q_1. The transversality floor is deliberately
// coarse: a coordinate the rotation barely moves pins the phase near a
// tangency, where the pinned value can fall outside the reachable orbit.
int pick_gauge_coord(const RotationGenerator& gen, const Eigen::VectorXd& Q1) {
    Eigen::VectorXd g = gen.G() * Q1;
    double gmax = g.cwiseAbs().maxCoeff();
    double scale = std::max(1.0, gen.G().cwiseAbs().maxCoeff() * Q1.cwiseAbs().maxCoeff());
    if (gmax <= 1e-12 * scale)
        throw GaugeConflict("G Q_1 vanishes; the rotational phase cannot be pinned");
    int best = -1;
    for (int c = 0; c < Q1.size(); ++c) {
        if (std::abs(g(c)) < 0.1 * gmax) continue;
        if (best < 0 || std::abs(Q1(c)) > std::abs(Q1(best)) ||
            (std::abs(Q1(c)) == std::abs(Q1(best)) && std::abs(g(c)) > std::abs(g(best))))
            best = c;
    }
    return best;
}

struct GaugeSystem {
    const REProblem& problem;
    int n, dim, gauge_coord;
    double pin_value;

    Eigen::VectorXd residual_aug(const Eigen::VectorXd& x, double* math_norm) const {
        Eigen::VectorXd rm = residual(unstack_positions(x, n, dim), problem);
        if (math_norm) *math_norm = rm.norm();
        Eigen::VectorXd r(rm.size() + 1);
        r.head(rm.size()) = rm;
        r(rm.size()) = x(gauge_coord) - pin_value;
        return r;
    }

    Eigen::MatrixXd jacobian_aug(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd Jm = jacobian(unstack_positions(x, n, dim), problem);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(Jm.rows() + 1, Jm.cols());
        J.topRows(Jm.rows()) = Jm;
        J(Jm.rows(), gauge_coord) = 1.0;
        return J;
    }
};

double condition_estimate(const Eigen::MatrixXd& J) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    double smin = svd.singularValues().tail(1)(0);
    double smax = svd.singularValues()(0);
    return smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

RESolution newton_solve(const REProblem& problem, const std::vector<Eigen::VectorXd>& Q0,
                        const SolveOptions& opts) {
    problem.validate();
    require_positions(Q0, problem);
    if (!(opts.tol >= 1e-13)) throw ConfigError("solver tol must be >= 1e-13");
    if (opts.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (problem.gen.restricted())
        for (const auto& q : Q0) problem.gen.check_position(q);

    const int n = problem.n();
    const int dim = problem.space.ambient_dim();
    GaugeSystem sys{problem, n, dim, pick_gauge_coord(problem.gen, Q0[0]), 0.0};
    Eigen::VectorXd x = stack_positions(Q0);
    sys.pin_value = x(sys.gauge_coord);

    double math_norm = 0;
    Eigen::VectorXd r = sys.residual_aug(x, &math_norm);

    double lambda = opts.damping;
    int iters = 0;
    const int N = n * dim;

    while (math_norm > opts.tol && iters < opts.max_iter) {
        Eigen::MatrixXd J = sys.jacobian_aug(x);
        Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::VectorXd g = J.transpose() * r;

        bool stepped = false;
        while (!stepped) {
            Eigen::MatrixXd M = JtJ + lambda * Eigen::MatrixXd::Identity(N, N);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
            bool bad = ldlt.info() != Eigen::Success;
            Eigen::VectorXd delta;
            if (!bad) {
                delta = ldlt.solve(-g);
                bad = !delta.allFinite();
            }
            if (!bad) {
                Eigen::VectorXd x_try = x + delta;
                double math_try = 0;
                bool eval_ok = true;
                Eigen::VectorXd r_try;
                try {
                    r_try = sys.residual_aug(x_try, &math_try);
                } catch (const Error&) {
                    // trial landed on a collision / off-manifold excursion
                    eval_ok = false;
                }
                if (eval_ok && r_try.norm() < r.norm()) {
                    x = x_try;
                    r = r_try;
                    math_norm = math_try;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    ++iters;
                    stepped = true;
                    continue;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e16)
                throw SingularJacobian(
                    "damping exceeded 1e16 without an acceptable step (residual " +
                    std::to_string(math_norm) + ")");
        }
    }

    if (math_norm > opts.tol)
        throw NoConvergence("residual " + std::to_string(math_norm) + " above tol after " +
                                std::to_string(iters) + " iterations",
                            iters, math_norm);

    RESolution sol;
    sol.space = problem.space;
    sol.masses = problem.masses;
    sol.positions = unstack_positions(x, n, dim);
    sol.residual_norm = math_norm;
    sol.newton_iterations = iters;
    sol.gauge_coord = sys.gauge_coord;
    sol.gauge_value = sys.pin_value;
    {
        std::ostringstream os;
        os << "Q1[" << sys.gauge_coord << "] pinned at " << sys.pin_value;
        sol.gauge = os.str();
    }
    sol.jacobian_condition = condition_estimate(sys.jacobian_aug(x));
    if (!problem.space.curved()) {
        Eigen::VectorXd weighted = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < n; ++i) weighted += problem.masses[i] * sol.positions[i];
        sol.centroid_residual = (problem.gen.A() * weighted).norm();
    }
    return sol;
}

VerifyReport verify(const std::vector<Eigen::VectorXd>& Q, const REProblem& problem,
                    double tol) {
    VerifyReport rep;
    rep.min_separation = min_pair_distance(Q);
    rep.max_norm = max_body_norm(Q);
    if (problem.space.curved() && Q.size() >= 2) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (size_t i = 0; i < Q.size(); ++i)
            for (size_t j = i + 1; j < Q.size(); ++j) {
                double dot = inner(Q[i], Q[j], problem.space);
                lo = std::min(lo, dot);
                hi = std::max(hi, dot);
            }
        rep.min_inner = lo;
        rep.max_inner = hi;
    }
    try {
        rep.residual_norm = residual(Q, problem).norm();
        rep.is_re = rep.residual_norm <= tol;
        if (!rep.is_re) rep.diagnostic = "residual above tolerance";
    } catch (const Error& e) {
        rep.is_re = false;
        rep.residual_norm = std::numeric_limits<double>::infinity();
        rep.diagnostic = e.what();
    }
    return rep;
}

REProblem apply_parameter(const REProblem& prototype, const ContinuationParameter& param,
                          double value) {
    REProblem p = prototype;
    switch (param.kind) {
        case ContinuationParameterKind::Omega: {
            if (!(value > 0)) throw ConfigError("omega must be positive");
            double c2 = prototype.gen.c2();
            if (!(c2 > 0)) throw ConfigError("prototype generator has no rotation to scale");
            Eigen::MatrixXd G = (value / std::sqrt(c2)) * prototype.gen.G();
            p.gen = validate_generator(G, prototype.space);
            break;
        }
        case ContinuationParameterKind::MassIndex: {
            if (param.index < 0 || param.index >= prototype.n())
                throw ConfigError("mass index out of range");
            if (!(value > 0)) throw ConfigError("masses must stay positive");
            p.masses[param.index] = value;
            break;
        }
        case ContinuationParameterKind::ExponentAlpha:
        case ContinuationParameterKind::ExponentBeta: {
            if (!prototype.law.has_value())
                throw ConfigError("exponent continuation needs a force law");
            const ForceLaw& law = *prototype.law;
            if (law.kind() == LawKind::Custom)
                throw ConfigError("exponent continuation is undefined for custom laws");
            bool is_alpha = param.kind == ContinuationParameterKind::ExponentAlpha;
            p.law = ForceLaw::quasi_homogeneous(law.a(), is_alpha ? value : law.alpha(),
                                                law.b(), is_alpha ? law.beta() : value);
            break;
        }
    }
    return p;
}

ContinuationFamily continue_family(const REProblem& prototype,
                                   const std::vector<Eigen::VectorXd>& seed,
                                   const ContinuationParameter& parameter,
                                   const std::vector<double>& grid,
                                   const ContinuationOptions& opts) {
    if (grid.empty()) throw ConfigError("continuation grid is empty");

    ContinuationFamily fam;
    fam.prototype = prototype;
    fam.parameter = parameter;
    fam.grid = grid;
    fam.solve_tol = opts.solve.tol;

    auto push_step = [&fam](double value, RESolution sol) {
        ContinuationStep step;
        step.param_value = value;
        step.min_separation = min_pair_distance(sol.positions);
        step.max_norm = max_body_norm(sol.positions);
        step.solution = std::move(sol);
        fam.steps.push_back(std::move(step));
    };

    RESolution first;
    try {
        first = newton_solve(apply_parameter(prototype, parameter, grid[0]), seed,
                             opts.solve);
    } catch (const Error& e) {
        throw UnverifiedMember(std::string("seed does not verify at the first grid point (") +
                               e.what() + ")");
    }
    push_step(grid[0], std::move(first));

    for (size_t k = 1; k < grid.size(); ++k) {
        const auto& prev = fam.steps[k - 1].solution.positions;
        Eigen::VectorXd xp = stack_positions(prev);
        Eigen::VectorXd pred = xp;
        if (k >= 2) {
            double dp = grid[k - 1] - grid[k - 2];
            if (dp != 0) {
                Eigen::VectorXd xpp = stack_positions(fam.steps[k - 2].solution.positions);
                pred = xp + (xp - xpp) * ((grid[k] - grid[k - 1]) / dp);
            }
        }
        const int n = prototype.n();
        const int dim = prototype.space.ambient_dim();
        RESolution sol;
        try {
            sol = newton_solve(apply_parameter(prototype, parameter, grid[k]),
                               unstack_positions(pred, n, dim), opts.solve);
        } catch (const Error&) {
            // the extrapolation can overshoot the branch (and with it the
            // reachable gauge pin); fall back to the last corrected point
            try {
                pred = xp;
                sol = newton_solve(apply_parameter(prototype, parameter, grid[k]),
                                   unstack_positions(pred, n, dim), opts.solve);
            } catch (const Error& e) {
                fam.complete = false;
                std::ostringstream os;
                os << "branch lost at step " << k << " (parameter " << grid[k]
                   << "): " << e.what();
                fam.abort_reason = os.str();
                return fam;
            }
        }
        double jump = (stack_positions(sol.positions) - pred).norm();
        if (jump > opts.trust_radius * std::max(1.0, xp.norm())) {
            fam.complete = false;
            std::ostringstream os;
            os << "branch lost at step " << k << " (parameter " << grid[k]
               << "): corrected point moved " << jump << " from the prediction";
            fam.abort_reason = os.str();
            return fam;
        }
        push_step(grid[k], std::move(sol));
    }

    fam.complete = true;
    return fam;
}

}  // namespace equilibra
