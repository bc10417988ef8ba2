#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "equilibra/errors.hpp"
#include "equilibra/forcelaw.hpp"
#include "equilibra/geometry.hpp"

namespace equilibra {

struct Configuration {
    SpaceForm space;
    std::vector<double> masses;
    std::vector<Eigen::VectorXd> positions;

    int n() const { return static_cast<int>(masses.size()); }

    /// Enforces n >= 2, positive masses, matching ambient dimensions,
    /// on-manifold positions (curved, tolerance 1e-10) and distinct bodies.
    /// Throws ConfigError, OffManifold, CollisionSingularity or
    /// AntipodalOrCoincidentSingularity.
    void validate() const;
};

struct PhaseState {
    Configuration config;
    std::vector<Eigen::VectorXd> velocities;

    /// validate() for the configuration plus, on curved spaces, the tangency
    /// condition |Q_i (.) V_i| <= 1e-10. Throws TangencyViolation.
    void validate() const;
};

/// a_i = sum_{j != i} m_j (Q_j - Q_i) f(|Q_j - Q_i|). Flat spaces only.
std::vector<Eigen::VectorXd> accel_flat(const Configuration& config, const ForceLaw& law);

/// Cotangent-potential acceleration on the sphere/hyperboloid,
///   a_i = sum_{j != i} m_j (Q_j - s(Q_i(.)Q_j) Q_i) / (s - s(Q_i(.)Q_j)^2)^{3/2}
///         - s (V_i(.)V_i) Q_i,      s = sigma,
/// which keeps q on the manifold: a_i(.)Q_i + V_i(.)V_i = 0.
std::vector<Eigen::VectorXd> accel_curved(const PhaseState& state);

struct TrajectorySample {
    double t = 0;
    std::vector<Eigen::VectorXd> positions;
    std::vector<Eigen::VectorXd> velocities;
};

struct Trajectory {
    SpaceForm space;
    std::vector<double> masses;
    std::vector<TrajectorySample> samples;

    // drift diagnostics over retained states (zero for flat spaces); a
    // projected step contributes its post-projection drift
    double max_constraint_drift = 0;  // max |Q(.)Q - sigma|
    double max_tangency_drift = 0;    // max |Q(.)V|
    long steps_accepted = 0;
    long steps_rejected = 0;
    long projections = 0;
};

/// Step-size collapse near a collision or antipodal pair. Carries the
/// trajectory integrated so far (samples recorded before the failure).
class SingularityEncountered : public Error {
public:
    SingularityEncountered(const std::string& detail, Trajectory partial)
        : Error("SingularityEncountered", detail),
          partial_(std::make_shared<Trajectory>(std::move(partial))) {}

    const Trajectory& partial() const { return *partial_; }

private:
    std::shared_ptr<const Trajectory> partial_;
};

struct IntegrateOptions {
    /// Uniform sample count on [0, t_end], endpoints included (>= 1).
    int n_samples = 201;
    /// Disables adaptivity and marches with this constant step instead
    /// (used by the convergence-order property check).
    std::optional<double> fixed_step;
    long max_steps = 20'000'000;
};

/// Dormand-Prince 5(4) adaptive integrator for the flat equations of motion.
/// rel_tol must lie in [1e-13, 1e-6].
Trajectory integrate(const PhaseState& state0, const ForceLaw& law, double t_end,
                     double rel_tol, const IntegrateOptions& opts = {});

/// Same integrator for the curved equations of motion (the interaction is the
/// built-in cotangent kernel; no force law applies). Positions are renormalized
/// to Q(.)Q = sigma and velocities re-tangentialized whenever the constraint
/// drift of a step exceeds 10 * rel_tol.
Trajectory integrate(const PhaseState& state0, double t_end, double rel_tol,
                     const IntegrateOptions& opts = {});

/// Maximum over samples and pairs of the shape change relative to t = 0:
/// flat |dist_ij(t) - dist_ij(0)|, curved |Q_i(t)(.)Q_j(t) - Q_i(0)(.)Q_j(0)|.
double rigidity_report(const Trajectory& trajectory);

}  // namespace equilibra
