#include "equilibra/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace equilibra {

namespace {

constexpr double kPairGuard = 1e-14;

void require_verified(const ContinuationFamily& family) {
    if (family.steps.empty()) throw UnverifiedMember("family has no members");
    double tol = family.solve_tol > 0 ? family.solve_tol : 1e-12;
    for (size_t k = 0; k < family.steps.size(); ++k) {
        const auto& step = family.steps[k];
        REProblem prob =
            apply_parameter(family.prototype, family.parameter, step.param_value);
        VerifyReport rep = verify(step.solution.positions, prob, tol);
        if (!rep.is_re) {
            std::ostringstream os;
            os << "family member " << k << " (parameter " << step.param_value
               << ") does not verify: "
               << (rep.diagnostic.empty() ? "residual above tolerance" : rep.diagnostic);
            throw UnverifiedMember(os.str());
        }
    }
}

struct PairMin {
    double value = std::numeric_limits<double>::infinity();
    int i = -1, j = -1;
};

PairMin min_pair(const std::vector<Eigen::VectorXd>& Q) {
    PairMin pm;
    for (size_t i = 0; i < Q.size(); ++i)
        for (size_t j = i + 1; j < Q.size(); ++j) {
            double d = (Q[i] - Q[j]).norm();
            if (d < pm.value) pm = {d, static_cast<int>(i), static_cast<int>(j)};
        }
    return pm;
}

double scan_c_hat(const ContinuationFamily& family, int* step_out = nullptr,
                  int* i_out = nullptr, int* j_out = nullptr) {
    double c_hat = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < family.steps.size(); ++k) {
        PairMin pm = min_pair(family.steps[k].solution.positions);
        if (pm.value < c_hat) {
            c_hat = pm.value;
            if (step_out) *step_out = static_cast<int>(k);
            if (i_out) *i_out = pm.i;
            if (j_out) *j_out = pm.j;
        }
    }
    return c_hat;
}

std::vector<double> midpoint_refine(const std::vector<double>& grid) {
    std::vector<double> fine;
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
        fine.push_back(grid[k]);
        fine.push_back(0.5 * (grid[k] + grid[k + 1]));
    }
    fine.push_back(grid.back());
    return fine;
}

void check_decreasing(const std::vector<double>& s_grid, double floor) {
    if (s_grid.size() < 2) throw ConfigError("probe s-grid needs at least 2 points");
    for (size_t k = 0; k < s_grid.size(); ++k) {
        if (!(s_grid[k] > 0) || s_grid[k] < floor)
            throw ConfigError("probe s-grid values must be positive and >= the floor");
        if (k > 0 && !(s_grid[k] < s_grid[k - 1]))
            throw ConfigError("probe s-grid must be strictly decreasing");
    }
}

}  // namespace

double fit_loglog_slope_last_decade(const std::vector<double>& x,
                                    const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw ConfigError("slope fit needs matching nonempty series");
    double x_min = *std::min_element(x.begin(), x.end());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t k = 0; k < x.size(); ++k) {
        if (x[k] > 10.0 * x_min * (1 + 1e-12)) continue;
        if (y[k] == 0) throw ConfigError("slope fit hit a zero value");
        double lx = std::log(x[k]), ly = std::log(std::abs(y[k]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) throw ConfigError("slope fit needs at least 2 points in the last decade");
    double denom = m * sxx - sx * sx;
    if (denom == 0) throw ConfigError("slope fit is degenerate");
    return (m * sxy - sx * sy) / denom;
}

SeparationCertificate separation_scan(const ContinuationFamily& family) {
    require_verified(family);

    SeparationCertificate cert;
    cert.c_hat = scan_c_hat(family, &cert.argmin_step, &cert.argmin_i, &cert.argmin_j);
    if (!(cert.c_hat > 0))
        throw UnverifiedMember("family contains a collision configuration");

    if (family.grid.size() >= 2) {
        ContinuationOptions opts;
        opts.solve.tol = family.solve_tol > 0 ? family.solve_tol : 1e-12;
        ContinuationFamily fine =
            continue_family(family.prototype, family.steps[0].solution.positions,
                            family.parameter, midpoint_refine(family.grid), opts);
        if (!fine.complete)
            throw UnverifiedMember("refined family lost the branch: " + fine.abort_reason);
        cert.stability_ratio = scan_c_hat(fine) / cert.c_hat;
    } else {
        cert.stability_ratio = 1.0;
    }
    return cert;
}

BoundednessCertificate boundedness_scan(const ContinuationFamily& family,
                                        const ForceLaw& law) {
    if (!law.compactness_flag())
        throw HypothesisNotMet(
            "x f(x) does not diverge toward collision; no boundedness certificate");
    require_verified(family);

    BoundednessCertificate cert;
    cert.compactness_flag = true;
    cert.C_hat = 0;
    for (size_t k = 0; k < family.steps.size(); ++k) {
        const auto& Q = family.steps[k].solution.positions;
        for (size_t i = 0; i < Q.size(); ++i) {
            double norm = Q[i].norm();
            if (norm > cert.C_hat) {
                cert.C_hat = norm;
                cert.argmax_step = static_cast<int>(k);
                cert.argmax_body = static_cast<int>(i);
            }
        }
    }
    return cert;
}

DivergenceProbeResult collision_divergence_probe(const std::vector<double>& masses,
                                                 const RotationGenerator& gen,
                                                 const ForceLaw& law,
                                                 const ShrinkPath& path,
                                                 const std::vector<double>& s_grid,
                                                 const DivergenceProbeOptions& opts) {
    if (gen.space().curved())
        throw DimensionMismatch("collision_divergence_probe is a flat-space probe");
    if (masses.size() < 2) throw ConfigError("probe needs at least 2 bodies");
    check_decreasing(s_grid, 1e-8);

    const int n = static_cast<int>(masses.size());
    DivergenceProbeResult result;
    result.c2 = gen.c2();

    for (double s : s_grid) {
        std::vector<Eigen::VectorXd> Q = path(s);
        if (static_cast<int>(Q.size()) != n)
            throw ConfigError("shrink path returned the wrong body count");
        Eigen::VectorXd u = Q[0] - Q[1];
        double dist = u.norm();
        if (std::abs(dist - s) > opts.path_tol * s)
            throw PathViolation("path does not realize |Q_1 - Q_2| = s at s = " +
                                std::to_string(s));
        u /= dist;

        double remainder = 0;
        double tri = 0;
        for (int j = 2; j < n; ++j) {
            double d1j = (Q[0] - Q[j]).norm();
            double d2j = (Q[j] - Q[1]).norm();
            if (std::min(d1j, d2j) < opts.far_gap_floor)
                throw PathViolation("body " + std::to_string(j + 1) +
                                    " entered the cluster neighborhood at s = " +
                                    std::to_string(s));
            double gap = d2j - d1j;
            tri = std::max(tri, std::abs(gap) / dist);
            // secant quotient of f across the pair, with the derivative
            // limit taking over when the two distances nearly coincide
            double B;
            if (std::abs(gap) > 1e-8 * dist)
                B = (law.eval(d2j) - law.eval(d1j)) / dist;
            else
                B = (law.eval_xfprime(d1j) / d1j) * (gap / dist);
            remainder += masses[j] * (law.eval(d1j) + (Q[j] - Q[1]).dot(u) * B);
        }

        result.s.push_back(s);
        result.remainder.push_back(remainder);
        result.triangle_ratio.push_back(tri);
        result.triangle_ratio_max = std::max(result.triangle_ratio_max, tri);
        result.required_bound.push_back((masses[0] + masses[1]) * law.eval(dist) +
                                        remainder);
    }

    result.slope = fit_loglog_slope_last_decade(result.s, result.required_bound);
    return result;
}

namespace {

// one pair's denominator base (sigma - sigma d^2), guarded
double guarded_base(double sigma, double dot, int i, int j) {
    double base = sigma - sigma * dot * dot;
    if (base < kPairGuard)
        throw AntipodalOrCoincidentSingularity(
            "bodies " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
            " have a singular pair denominator");
    return base;
}

}  // namespace

ClusterIdentityResult curved_cluster_identity(const std::vector<Eigen::VectorXd>& Q,
                                              const std::vector<double>& masses,
                                              const SpaceForm& space,
                                              const std::vector<int>& cluster) {
    if (!space.curved())
        throw DimensionMismatch("cluster identity is defined on curved spaces");
    if (Q.size() != masses.size())
        throw ConfigError("masses and positions disagree on the body count");
    for (int c : cluster)
        if (c < 0 || c >= static_cast<int>(Q.size()))
            throw ConfigError("cluster index out of range");

    const double sg = space.sigma;
    const int dim = space.ambient_dim();
    Eigen::VectorXd lhs = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd rhs_alt = Eigen::VectorXd::Zero(dim);

    for (int i : cluster) {
        for (int j : cluster) {
            if (i == j) continue;
            double dot = inner(Q[i], Q[j], space);
            double base = guarded_base(sg, dot, i, j);
            double mm = masses[i] * masses[j];
            lhs += 2.0 * mm * (Q[j] - sg * dot * Q[i]) / std::pow(base, 1.5);
            rhs += mm * (Q[i] + Q[j]) / (std::sqrt(base) * sg * (1.0 + sg * dot));
            rhs_alt += mm * (Q[i] + Q[j]) / (std::sqrt(base) * sg * (1.0 + dot));
        }
    }

    ClusterIdentityResult result;
    result.cluster = cluster;
    result.scale = lhs.norm();
    if (result.scale > 0) {
        result.residual_rel = (lhs - rhs).norm() / result.scale;
        result.residual_rel_alt = (lhs - rhs_alt).norm() / result.scale;
    }
    result.denominator_resolution =
        "sigma (1 + sigma Q_i(.)Q_j): exact for both curvatures; the sigma (1 + "
        "Q_i(.)Q_j) reading coincides on the sphere and fails on the hyperboloid";
    return result;
}

ClusterDivergenceResult curved_cluster_divergence(const std::vector<double>& masses,
                                                  const RotationGenerator& gen,
                                                  const std::vector<int>& cluster,
                                                  const ClusterPath& path, double epsilon,
                                                  const std::vector<double>& s_grid,
                                                  const ClusterDivergenceOptions& opts) {
    const SpaceForm space = gen.space();
    if (!space.curved())
        throw DimensionMismatch("cluster divergence is a curved-space probe");
    if (cluster.size() < 2) throw ConfigError("cluster needs at least 2 bodies");
    for (int c : cluster)
        if (c < 0 || c >= static_cast<int>(masses.size()))
            throw ConfigError("cluster index out of range");
    check_decreasing(s_grid, 0.0);
    if (space.sigma > 0 && !(epsilon > 0))
        throw ConfigError("sphere probes need a positive antipodal guard epsilon");

    const int n = static_cast<int>(masses.size());
    const double sg = space.sigma;
    std::vector<char> in_cluster(n, 0);
    for (int c : cluster) in_cluster[c] = 1;

    ClusterDivergenceResult result;
    result.cluster = cluster;
    result.epsilon = epsilon;
    result.lhs_band_lo = std::numeric_limits<double>::infinity();
    result.lhs_band_hi = -result.lhs_band_lo;

    for (double s : s_grid) {
        std::vector<Eigen::VectorXd> Q = path(s);
        if (static_cast<int>(Q.size()) != n)
            throw ConfigError("cluster path returned the wrong body count");

        if (sg > 0) {
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (!(inner(Q[i], Q[j], space) > -1.0 + epsilon))
                        throw AntipodalGuardViolation(
                            "pair (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ") violates Q_i(.)Q_j > -1+eps at s = " +
                            std::to_string(s));
        }

        // the cluster must actually have (extrinsic) diameter ~ s, far bodies
        // must stay away from every cluster body
        double diam = 0;
        for (size_t a = 0; a < cluster.size(); ++a)
            for (size_t b = a + 1; b < cluster.size(); ++b)
                diam = std::max(diam, (Q[cluster[a]] - Q[cluster[b]]).norm());
        if (std::abs(diam - s) > opts.path_tol * s)
            throw PathViolation("cluster diameter " + std::to_string(diam) +
                                " does not track s = " + std::to_string(s));
        for (int i : cluster)
            for (int j = 0; j < n; ++j) {
                if (in_cluster[j]) continue;
                double dot = inner(Q[i], Q[j], space);
                if (std::abs(dot - sg) < opts.far_gap_floor)
                    throw PathViolation("far body " + std::to_string(j + 1) +
                                        " entered the cluster neighborhood at s = " +
                                        std::to_string(s));
            }

        // left side: generator data summed over the cluster minus the
        // cluster-to-far interaction, projected on Q_1
        const Eigen::VectorXd& Q1 = Q[cluster[0]];
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(space.ambient_dim());
        for (int i : cluster) acc += masses[i] * curved_rotation_term(gen, Q[i]);
        for (int i : cluster)
            for (int j = 0; j < n; ++j) {
                if (in_cluster[j]) continue;
                double dot = inner(Q[i], Q[j], space);
                double base = guarded_base(sg, dot, i, j);
                acc -= masses[i] * masses[j] * (Q[j] - sg * dot * Q[i]) /
                       std::pow(base, 1.5);
            }
        double lhs = inner(acc, Q1, space);

        // right side: the collected intra-cluster double sum
        double rhs = 0;
        for (int i : cluster)
            for (int j : cluster) {
                if (i == j) continue;
                double dot = inner(Q[i], Q[j], space);
                double base = guarded_base(sg, dot, i, j);
                rhs += 0.5 * masses[i] * masses[j] *
                       inner(Q[i] + Q[j], Q1, space) /
                       (std::sqrt(base) * sg * (1.0 + sg * dot));
            }

        result.s.push_back(s);
        result.lhs.push_back(lhs);
        result.rhs.push_back(rhs);
        result.lhs_band_lo = std::min(result.lhs_band_lo, lhs);
        result.lhs_band_hi = std::max(result.lhs_band_hi, lhs);
    }

    result.slope = fit_loglog_slope_last_decade(result.s, result.rhs);
    return result;
}

}  // namespace equilibra
