#include "equilibra/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace equilibra {

namespace {

constexpr double kPairGuard = 1e-14;

std::string pair_label(int i, int j) {
    std::ostringstream os;
    os << "bodies " << i + 1 << " and " << j + 1;
    return os.str();
}

void check_common(const Configuration& c) {
    const int n = c.n();
    if (n < 2) throw ConfigError("configuration needs at least 2 bodies");
    if (static_cast<int>(c.positions.size()) != n)
        throw ConfigError("masses and positions disagree on the body count");
    for (double m : c.masses)
        if (!(m > 0)) throw ConfigError("masses must be strictly positive");
    const int dim = c.space.ambient_dim();
    for (const auto& q : c.positions)
        if (q.size() != dim)
            throw DimensionMismatch("position dimension does not match the space");
}

}  // namespace

void Configuration::validate() const {
    check_common(*this);
    const int nn = n();
    if (space.curved()) {
        for (int i = 0; i < nn; ++i)
            if (!on_manifold(positions[i], space, 1e-10))
                throw OffManifold("body " + std::to_string(i + 1) +
                                  " violates Q(.)Q = sigma beyond 1e-10");
        for (int i = 0; i < nn; ++i)
            for (int j = i + 1; j < nn; ++j) {
                double d = inner(positions[i], positions[j], space);
                if (std::abs(space.sigma - space.sigma * d * d) < kPairGuard)
                    throw AntipodalOrCoincidentSingularity(pair_label(i, j) +
                                                           " are coincident or antipodal");
            }
    } else {
        for (int i = 0; i < nn; ++i)
            for (int j = i + 1; j < nn; ++j)
                if ((positions[i] - positions[j]).norm() < kPairGuard)
                    throw CollisionSingularity(pair_label(i, j) + " coincide");
    }
}

void PhaseState::validate() const {
    config.validate();
    if (velocities.size() != config.positions.size())
        throw ConfigError("velocity count does not match the body count");
    const int dim = config.space.ambient_dim();
    for (const auto& v : velocities)
        if (v.size() != dim)
            throw DimensionMismatch("velocity dimension does not match the space");
    if (config.space.curved()) {
        for (size_t i = 0; i < velocities.size(); ++i) {
            double t = inner(config.positions[i], velocities[i], config.space);
            if (std::abs(t) > 1e-10)
                throw TangencyViolation("body " + std::to_string(i + 1) +
                                        " velocity is not tangent (Q(.)V = " +
                                        std::to_string(t) + ")");
        }
    }
}

std::vector<Eigen::VectorXd> accel_flat(const Configuration& config, const ForceLaw& law) {
    if (config.space.curved())
        throw DimensionMismatch("accel_flat called with a curved space");
    check_common(config);
    const int n = config.n();
    std::vector<Eigen::VectorXd> a(n, Eigen::VectorXd::Zero(config.space.ambient_dim()));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd diff = config.positions[j] - config.positions[i];
            double d = diff.norm();
            if (d < kPairGuard)
                throw CollisionSingularity(pair_label(i, j) + " closer than 1e-14");
            double f = law.eval(d);
            // antisymmetric pair update keeps sum m_i a_i = 0 to roundoff
            a[i] += config.masses[j] * f * diff;
            a[j] -= config.masses[i] * f * diff;
        }
    }
    return a;
}

std::vector<Eigen::VectorXd> accel_curved(const PhaseState& state) {
    const Configuration& c = state.config;
    if (!c.space.curved())
        throw DimensionMismatch("accel_curved called with a flat space");
    state.validate();
    const int n = c.n();
    const double s = c.space.sigma;
    std::vector<Eigen::VectorXd> a(n, Eigen::VectorXd::Zero(c.space.ambient_dim()));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dot = inner(c.positions[i], c.positions[j], c.space);
            double base = s - s * dot * dot;
            if (base < kPairGuard)
                throw AntipodalOrCoincidentSingularity(
                    pair_label(i, j) + " singular denominator (Q_i(.)Q_j = " +
                    std::to_string(dot) + ")");
            a[i] += c.masses[j] * (c.positions[j] - s * dot * c.positions[i]) /
                    std::pow(base, 1.5);
        }
        double v2 = inner(state.velocities[i], state.velocities[i], c.space);
        a[i] -= s * v2 * c.positions[i];
    }
    return a;
}

namespace {

// Dormand-Prince 5(4) tableau. The last stage row doubles as the 5th-order
// weights (FSAL), bhat holds the embedded 4th-order weights.
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
constexpr double kBhat[7] = {5179.0 / 57600, 0,           7571.0 / 16695, 393.0 / 640,
                             -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct Packer {
    int n, dim;

    int size() const { return 2 * n * dim; }

    Eigen::VectorXd pack(const std::vector<Eigen::VectorXd>& q,
                         const std::vector<Eigen::VectorXd>& v) const {
        Eigen::VectorXd y(size());
        for (int i = 0; i < n; ++i) {
            y.segment(i * dim, dim) = q[i];
            y.segment((n + i) * dim, dim) = v[i];
        }
        return y;
    }

    void unpack(const Eigen::VectorXd& y, std::vector<Eigen::VectorXd>& q,
                std::vector<Eigen::VectorXd>& v) const {
        q.resize(n);
        v.resize(n);
        for (int i = 0; i < n; ++i) {
            q[i] = y.segment(i * dim, dim);
            v[i] = y.segment((n + i) * dim, dim);
        }
    }
};

using Rhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

double min_pair_gap(const Configuration& c, const std::vector<Eigen::VectorXd>& q) {
    double g = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < q.size(); ++i)
        for (size_t j = i + 1; j < q.size(); ++j) {
            if (c.space.curved()) {
                double dot = inner(q[i], q[j], c.space);
                g = std::min(g, std::abs(c.space.sigma - c.space.sigma * dot * dot));
            } else {
                g = std::min(g, (q[i] - q[j]).norm());
            }
        }
    return g;
}

Trajectory run_dopri5(const PhaseState& state0, const Rhs& rhs, double t_end,
                      double rel_tol, const IntegrateOptions& opts) {
    if (!(rel_tol >= 1e-13 && rel_tol <= 1e-6))
        throw ConfigError("rel_tol must lie in [1e-13, 1e-6]");
    if (opts.n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (opts.fixed_step && !(*opts.fixed_step > 0))
        throw ConfigError("fixed_step must be positive");
    state0.validate();
    if (!(t_end >= 0)) throw ConfigError("t_end must be >= 0");

    const Configuration& c0 = state0.config;
    const SpaceForm space = c0.space;
    const double sigma = space.sigma;
    Packer pk{c0.n(), space.ambient_dim()};

    Trajectory traj;
    traj.space = space;
    traj.masses = c0.masses;

    std::vector<double> sample_times;
    if (t_end == 0 || opts.n_samples == 1) {
        sample_times.push_back(0.0);
    } else {
        for (int i = 0; i < opts.n_samples; ++i)
            sample_times.push_back(t_end * i / (opts.n_samples - 1));
    }

    std::vector<Eigen::VectorXd> q, v;
    Eigen::VectorXd y = pk.pack(c0.positions, state0.velocities);

    auto record = [&](double t) {
        pk.unpack(y, q, v);
        traj.samples.push_back({t, q, v});
    };

    auto measure_drift = [&](double& worst_c, double& worst_t) {
        worst_c = 0;
        worst_t = 0;
        for (int i = 0; i < pk.n; ++i) {
            worst_c = std::max(worst_c, std::abs(inner(q[i], q[i], space) - sigma));
            worst_t = std::max(worst_t, std::abs(inner(q[i], v[i], space)));
        }
    };

    // measure the constraint drift of the current state and project back to
    // the manifold when it exceeds the threshold; returns true if projected.
    // The recorded diagnostics are the drift the retained state carries, so
    // a projected step contributes its post-projection (roundoff) drift.
    auto drift_and_project = [&](double threshold) -> bool {
        if (!space.curved()) return false;
        pk.unpack(y, q, v);
        double worst_c, worst_t;
        measure_drift(worst_c, worst_t);
        bool projected = false;
        if (worst_c > threshold || worst_t > threshold) {
            for (int i = 0; i < pk.n; ++i) {
                double qq = inner(q[i], q[i], space);
                // qq has the sign of sigma for any point near the manifold
                q[i] *= 1.0 / std::sqrt(qq / sigma);
                v[i] -= sigma * inner(q[i], v[i], space) * q[i];
            }
            y = pk.pack(q, v);
            ++traj.projections;
            projected = true;
            measure_drift(worst_c, worst_t);
        }
        traj.max_constraint_drift = std::max(traj.max_constraint_drift, worst_c);
        traj.max_tangency_drift = std::max(traj.max_tangency_drift, worst_t);
        return projected;
    };

    record(0.0);
    if (sample_times.size() == 1) return traj;

    const double proj_threshold = 10.0 * rel_tol;
    const double abs_tol = rel_tol;  // states here are O(1); one knob is enough
    size_t next_sample = 1;
    double t = 0;
    double h = opts.fixed_step ? *opts.fixed_step
                               : std::min(1e-3, t_end / (opts.n_samples - 1));
    const double h_floor = 1e-14 * std::max(1.0, t_end);

    Eigen::VectorXd k[7];
    bool have_k0 = false;

    auto singular_bail = [&](const std::string& why) -> void {
        pk.unpack(y, q, v);
        Configuration probe{space, c0.masses, q};
        double gap = min_pair_gap(probe, q);
        std::ostringstream os;
        os << why << " at t = " << t << " (min pair gap " << gap << ")";
        if (gap < 1e-6)
            throw SingularityEncountered(os.str(), std::move(traj));
        throw ToleranceUnachievable(os.str());
    };

    for (long step = 0; next_sample < sample_times.size(); ++step) {
        if (step >= opts.max_steps)
            throw ToleranceUnachievable("step budget exhausted before t_end");

        double h_try = std::min(h, sample_times[next_sample] - t);
        bool stage_singular = false;
        std::string stage_detail;
        Eigen::VectorXd y5, err;

        try {
            if (!have_k0) {
                k[0] = rhs(y);
                have_k0 = true;
            }
            for (int s = 1; s < 7; ++s) {
                Eigen::VectorXd ys = y;
                for (int j = 0; j < s; ++j)
                    if (kA[s][j] != 0) ys += h_try * kA[s][j] * k[j];
                k[s] = rhs(ys);
            }
            // the 5th-order weights are row 7 of the tableau (b7 = 0)
            y5 = y;
            for (int j = 0; j < 6; ++j)
                if (kA[6][j] != 0) y5 += h_try * kA[6][j] * k[j];
            err = Eigen::VectorXd::Zero(y.size());
            for (int j = 0; j < 7; ++j) {
                double db = (j < 6 ? kA[6][j] : 0.0) - kBhat[j];
                if (db != 0) err += h_try * db * k[j];
            }
        } catch (const CollisionSingularity& e) {
            stage_singular = true;
            stage_detail = e.what();
        } catch (const AntipodalOrCoincidentSingularity& e) {
            stage_singular = true;
            stage_detail = e.what();
        }

        bool accept = false;
        double err_norm = 0;
        if (!stage_singular) {
            double acc = 0;
            for (int i = 0; i < y.size(); ++i) {
                double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                double e = err[i] / scale;
                acc += e * e;
            }
            err_norm = std::sqrt(acc / y.size());
            accept = opts.fixed_step.has_value() ||
                     (std::isfinite(err_norm) && err_norm <= 1.0);
        }

        if (accept) {
            t += h_try;
            y = y5;
            k[0] = k[6];  // FSAL
            ++traj.steps_accepted;
            if (drift_and_project(proj_threshold)) have_k0 = false;
            while (next_sample < sample_times.size() &&
                   t >= sample_times[next_sample] - 1e-12 * std::max(1.0, t_end)) {
                record(sample_times[next_sample]);
                ++next_sample;
            }
            if (!opts.fixed_step) {
                double grow = err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
                h = h_try * std::clamp(grow, 0.2, 5.0);
            }
        } else {
            if (opts.fixed_step && stage_singular)
                throw SingularityEncountered(stage_detail, std::move(traj));
            ++traj.steps_rejected;
            have_k0 = false;  // k[0] was fine, but recompute defensively after failure
            double shrink = stage_singular || !std::isfinite(err_norm)
                                ? 0.2
                                : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.5);
            h = h_try * shrink;
            if (h < h_floor)
                singular_bail(stage_singular ? "stage evaluation hit a singular pair"
                                             : "step size collapsed under the error control");
        }
    }

    return traj;
}

}  // namespace

Trajectory integrate(const PhaseState& state0, const ForceLaw& law, double t_end,
                     double rel_tol, const IntegrateOptions& opts) {
    if (state0.config.space.curved())
        throw DimensionMismatch("flat integrate overload called with a curved space");
    Packer pk{state0.config.n(), state0.config.space.ambient_dim()};
    Configuration work = state0.config;
    Rhs rhs = [&law, pk, work](const Eigen::VectorXd& y) mutable -> Eigen::VectorXd {
        std::vector<Eigen::VectorXd> q, v;
        pk.unpack(y, q, v);
        work.positions = q;
        std::vector<Eigen::VectorXd> a = accel_flat(work, law);
        Eigen::VectorXd dy(y.size());
        for (int i = 0; i < pk.n; ++i) {
            dy.segment(i * pk.dim, pk.dim) = v[i];
            dy.segment((pk.n + i) * pk.dim, pk.dim) = a[i];
        }
        return dy;
    };
    return run_dopri5(state0, rhs, t_end, rel_tol, opts);
}

Trajectory integrate(const PhaseState& state0, double t_end, double rel_tol,
                     const IntegrateOptions& opts) {
    if (!state0.config.space.curved())
        throw DimensionMismatch("curved integrate overload called with a flat space");
    const SpaceForm space = state0.config.space;
    const double sigma = space.sigma;
    const std::vector<double>& masses = state0.config.masses;
    Packer pk{state0.config.n(), space.ambient_dim()};
    // inline curved right-hand side: accel_curved's state.validate() would
    // reject the small constraint drift that accumulates mid-step
    Rhs rhs = [pk, space, sigma, masses](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        std::vector<Eigen::VectorXd> q, v;
        pk.unpack(y, q, v);
        Eigen::VectorXd dy(y.size());
        for (int i = 0; i < pk.n; ++i) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(pk.dim);
            for (int j = 0; j < pk.n; ++j) {
                if (j == i) continue;
                double dot = inner(q[i], q[j], space);
                double base = sigma - sigma * dot * dot;
                if (base < kPairGuard)
                    throw AntipodalOrCoincidentSingularity(
                        pair_label(i, j) + " singular denominator during a step");
                a += masses[j] * (q[j] - sigma * dot * q[i]) / std::pow(base, 1.5);
            }
            a -= sigma * inner(v[i], v[i], space) * q[i];
            dy.segment(i * pk.dim, pk.dim) = v[i];
            dy.segment((pk.n + i) * pk.dim, pk.dim) = a;
        }
        return dy;
    };
    return run_dopri5(state0, rhs, t_end, rel_tol, opts);
}

double rigidity_report(const Trajectory& trajectory) {
    if (trajectory.samples.size() < 2)
        throw ConfigError("rigidity_report needs a trajectory with >= 2 samples");
    const SpaceForm& space = trajectory.space;
    const auto& first = trajectory.samples.front().positions;
    const size_t n = first.size();

    auto shape = [&](const std::vector<Eigen::VectorXd>& q, size_t i, size_t j) {
        return space.curved() ? inner(q[i], q[j], space) : (q[i] - q[j]).norm();
    };

    double drift = 0;
    for (const auto& sample : trajectory.samples)
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                drift = std::max(drift,
                                 std::abs(shape(sample.positions, i, j) - shape(first, i, j)));
    return drift;
}

}  // namespace equilibra
