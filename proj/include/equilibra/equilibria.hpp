#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "equilibra/dynamics.hpp"
#include "equilibra/errors.hpp"
#include "equilibra/forcelaw.hpp"
#include "equilibra/geometry.hpp"

namespace equilibra {

/// Data defining the algebraic system for steadily rotating configurations:
/// flat   A Q_i + sum_{j != i} m_j (Q_j - Q_i) f(|Q_j - Q_i|) = 0,
/// curved F_i(Q) - G^2 Q_i - sigma ((G Q_i)(.)(G Q_i)) Q_i = 0 plus the
///        constraint rows Q_i(.)Q_i - sigma = 0,
/// where F_i is the cotangent-kernel force sum of accel_curved.
struct REProblem {
    SpaceForm space;
    std::vector<double> masses;
    std::optional<ForceLaw> law;  // required for flat spaces, ignored for curved
    RotationGenerator gen;

    int n() const { return static_cast<int>(masses.size()); }
    void validate() const;
};

/// Positions are handled as one stacked vector [Q_1; ...; Q_n].
Eigen::VectorXd stack_positions(const std::vector<Eigen::VectorXd>& Q);
std::vector<Eigen::VectorXd> unstack_positions(const Eigen::VectorXd& x, int n, int dim);

/// Flat residual, stacked over bodies (length n*dim).
Eigen::VectorXd residual_flat(const std::vector<Eigen::VectorXd>& Q,
                              const REProblem& problem);

/// G^2 Q + sigma ((G Q)(.)(G Q)) Q, the rotation side of the curved system.
Eigen::VectorXd curved_rotation_term(const RotationGenerator& gen,
                                     const Eigen::VectorXd& Q);

/// Curved residual: n*dim force-balance rows followed by the n constraint
/// rows Q_i(.)Q_i - sigma. Iterates may drift slightly off the manifold (the
/// constraint rows drive them back); grossly off-manifold input (deviation
/// beyond 0.1) is rejected as OffManifold.
Eigen::VectorXd residual_curved(const std::vector<Eigen::VectorXd>& Q,
                                const REProblem& problem);

/// Residual of whichever system matches problem.space.
Eigen::VectorXd residual(const std::vector<Eigen::VectorXd>& Q, const REProblem& problem);

/// Jacobian of residual() with respect to the stacked positions. Flat uses
/// the closed-form blocks m_j [f I + f' u u^T / d]; curved uses central
/// finite differences with step h = eps^{1/3} (1 + |x|).
Eigen::MatrixXd jacobian(const std::vector<Eigen::VectorXd>& Q, const REProblem& problem);

struct SolveOptions {
    double tol = 1e-12;    // accept when the residual 2-norm drops below this
    int max_iter = 100;    // accepted Newton steps
    double damping = 1e-3; // initial Levenberg-Marquardt lambda
};

struct RESolution {
    SpaceForm space;
    std::vector<double> masses;
    std::vector<Eigen::VectorXd> positions;
    double residual_norm = 0;
    int newton_iterations = 0;
    std::string gauge;                 // e.g. "Q1[2] pinned at 0"
    int gauge_coord = -1;              // pinned coordinate index within Q_1
    double gauge_value = 0;
    double jacobian_condition = 0;     // SVD condition of the final gauge-fixed Jacobian
    // flat only: |A sum_i m_i Q_i|, which vanishes at an exact solution
    // because the interaction terms cancel pairwise in sum_i m_i R_i
    std::optional<double> centroid_residual;
};

/// Levenberg-Marquardt damped Newton on the gauge-fixed system. The rotational
/// phase is pinned by holding one coordinate of Q_1 at its initial value; the
/// coordinate is the largest-magnitude entry of Q_1 among those with a
/// nonvanishing component of G Q_1 (so the pin actually cuts the rotational
/// null direction). lambda starts at opts.damping, x10 on a rejected step,
/// /10 on acceptance with floor 1e-12; lambda beyond 1e16 or a failed
/// factorization is SingularJacobian. Throws NoConvergence after max_iter
/// accepted steps, GaugeConflict if G Q_1 vanishes at the start.
RESolution newton_solve(const REProblem& problem, const std::vector<Eigen::VectorXd>& Q0,
                        const SolveOptions& opts = {});

struct VerifyReport {
    bool is_re = false;
    double residual_norm = 0;
    double min_separation = 0;  // min over pairs of |Q_i - Q_j| (ambient norm)
    // curved only: extremes of the pairwise products Q_i(.)Q_j
    std::optional<double> min_inner, max_inner;
    double max_norm = 0;  // max ambient |Q_i|
    std::string diagnostic;
};

/// Evaluates the residual and separation diagnostics; never throws (singular
/// input yields is_re = false with the diagnostic naming the cause).
VerifyReport verify(const std::vector<Eigen::VectorXd>& Q, const REProblem& problem,
                    double tol);

enum class ContinuationParameterKind { Omega, MassIndex, ExponentAlpha, ExponentBeta };

struct ContinuationParameter {
    ContinuationParameterKind kind = ContinuationParameterKind::Omega;
    int index = 0;  // body index for MassIndex, otherwise unused
};

/// Rebuilds the problem at a parameter value: Omega rescales the generator to
/// angular speed omega (G = omega * G0 / sqrt(c2(G0))), MassIndex replaces
/// masses[index], ExponentAlpha/Beta rebuild a quasi-homogeneous law.
REProblem apply_parameter(const REProblem& prototype, const ContinuationParameter& param,
                          double value);

struct ContinuationStep {
    double param_value = 0;
    RESolution solution;
    double min_separation = 0;
    double max_norm = 0;
};

struct ContinuationFamily {
    REProblem prototype;  // the problem the parameter values are applied to
    ContinuationParameter parameter;
    std::vector<double> grid;
    std::vector<ContinuationStep> steps;
    double solve_tol = 0;  // corrector tolerance the members were accepted at
    bool complete = false;
    std::string abort_reason;  // empty when complete
};

struct ContinuationOptions {
    SolveOptions solve;
    // reject a corrected step whose distance from the secant prediction
    // exceeds trust_radius * max(1, |Q|): the corrector jumped branches
    double trust_radius = 1.0;
};

/// Secant predictor / newton_solve corrector along the grid. The seed must
/// verify at the first grid point (UnverifiedMember otherwise). On a failed
/// correction the family is returned incomplete with abort_reason set; the
/// steps solved so far are kept.
ContinuationFamily continue_family(const REProblem& prototype,
                                   const std::vector<Eigen::VectorXd>& seed,
                                   const ContinuationParameter& parameter,
                                   const std::vector<double>& grid,
                                   const ContinuationOptions& opts = {});

}  // namespace equilibra
