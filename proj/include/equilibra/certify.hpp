#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "equilibra/equilibria.hpp"
#include "equilibra/errors.hpp"

namespace equilibra {

/// Empirical lower bound on pairwise separation over a verified family.
struct SeparationCertificate {
    double c_hat = 0;       // min over members of min_{i<j} |Q_i - Q_j|
    int argmin_step = -1;   // family step attaining c_hat
    int argmin_i = -1, argmin_j = -1;
    // c_hat recomputed on a midpoint-refined grid, divided by the coarse value
    double stability_ratio = 0;
};

/// Re-verifies every member at the family's solve tolerance, takes the
/// minimum pairwise separation, then re-runs the continuation on a 2x-refined
/// grid (midpoints inserted) for the stability ratio. Empty or unverified
/// families are UnverifiedMember.
SeparationCertificate separation_scan(const ContinuationFamily& family);

/// Empirical upper bound on |Q_i| over a verified family, issued only for
/// laws whose kernel satisfies x f(x) -> +/-inf toward collision.
struct BoundednessCertificate {
    double C_hat = 0;  // max over members and bodies of |Q_i|
    bool compactness_flag = false;  // echo of the hypothesis that was checked
    int argmax_step = -1, argmax_body = -1;
};

/// Throws HypothesisNotMet when law.compactness_flag() is false; otherwise
/// scans the verified family for the largest body norm.
BoundednessCertificate boundedness_scan(const ContinuationFamily& family,
                                        const ForceLaw& law);

/// Map s = |Q_1 - Q_2| to a full flat configuration (bodies 3..n fixed).
using ShrinkPath = std::function<std::vector<Eigen::VectorXd>(double)>;

struct DivergenceProbeResult {
    std::vector<double> s;
    // (m_1 + m_2) f(s) + remainder(s): the rotation strength <A u, u>/|u|^2
    // that the pair equation would demand of an equilibrium at separation s
    std::vector<double> required_bound;
    // the far-body terms, bounded along an admissible path:
    //   sum_{j>=3} m_j [ f(|Q_1 - Q_j|) + <Q_j - Q_2, u> B_js ],  u = (Q_1-Q_2)/s
    std::vector<double> remainder;
    // per-s max_j |(|Q_j-Q_2| - |Q_1-Q_j|)| / s, the triangle-inequality check
    std::vector<double> triangle_ratio;
    double slope = 0;               // log-log fit of required_bound, last decade
    double triangle_ratio_max = 0;  // max of triangle_ratio over the grid, <= 1
    double c2 = 0;                  // the generator bound the demand must beat
};

struct DivergenceProbeOptions {
    // far bodies must keep at least this distance from the shrinking pair
    double far_gap_floor = 1e-3;
    // relative mismatch allowed between |Q_1 - Q_2| and the requested s
    double path_tol = 1e-9;
};

/// The pair-equation projection behind the flat separation bound: subtracting
/// the body-1 and body-2 equilibrium equations and projecting onto Q_1 - Q_2
/// shows <A u, u>/|u|^2 = (m_1+m_2) f(s) + remainder(s). The secant quotient
/// B_js = (f(|Q_j-Q_2|) - f(|Q_1-Q_j|)) / s switches to the derivative form
/// f'(d) (|Q_j-Q_2| - |Q_1-Q_j|) / s when the distance gap drops below
/// 1e-8 s. s_grid must be decreasing with min >= 1e-8.
DivergenceProbeResult collision_divergence_probe(const std::vector<double>& masses,
                                                 const RotationGenerator& gen,
                                                 const ForceLaw& law,
                                                 const ShrinkPath& path,
                                                 const std::vector<double>& s_grid,
                                                 const DivergenceProbeOptions& opts = {});

struct ClusterIdentityResult {
    std::vector<int> cluster;  // 0-based body indices
    // |LHS - RHS| / |LHS| with the denominator sigma (1 + sigma Q_i(.)Q_j)
    double residual_rel = 0;
    // same with the alternative reading sigma (1 + Q_i(.)Q_j); coincides on
    // the sphere, differs on the hyperboloid
    double residual_rel_alt = 0;
    double scale = 0;  // |LHS|
    std::string denominator_resolution;
};

/// Checks the pair-collection identity behind the curved cluster estimates:
///   2 sum_{i != j in cluster} m_i m_j (Q_j - s d_ij Q_i) / (s - s d_ij^2)^{3/2}
///     = sum_{i != j in cluster} m_i m_j (Q_i + Q_j)
///         / ((s - s d_ij^2)^{1/2} s (1 + s d_ij)),   d_ij = Q_i(.)Q_j, s = sigma,
/// evaluating both sides independently. The denominator factor is written
/// ambiguously in two forms; the s(1 + s d) form is the one that is exact for
/// both curvatures, and residual_rel_alt records how the other reading fares.
ClusterIdentityResult curved_cluster_identity(const std::vector<Eigen::VectorXd>& Q,
                                              const std::vector<double>& masses,
                                              const SpaceForm& space,
                                              const std::vector<int>& cluster);

/// Map the cluster diameter s to a full curved configuration.
using ClusterPath = std::function<std::vector<Eigen::VectorXd>(double)>;

struct ClusterDivergenceResult {
    std::vector<int> cluster;
    std::vector<double> s;
    // left side: (sum_{i in cluster} m_i B_i - B_cross)(.)Q_1 with
    // B_i = G^2 Q_i + sigma ((G Q_i)(.)(G Q_i)) Q_i the generator data and
    // B_cross the cluster-to-far force sum; bounded along bounded paths
    std::vector<double> lhs;
    // right side: (1/2) sum_{i != j in cluster} m_i m_j (Q_i+Q_j)(.)Q_1
    //   / ((sigma - sigma d^2)^{1/2} sigma (1 + sigma d)); diverges like 1/s
    std::vector<double> rhs;
    double slope = 0;  // log-log fit of rhs, last decade
    double lhs_band_lo = 0, lhs_band_hi = 0;
    double epsilon = 0;
};

struct ClusterDivergenceOptions {
    // far bodies must keep |Q_i(.)Q_j - sigma| at least this large
    double far_gap_floor = 1e-3;
    // relative mismatch allowed between the realized cluster diameter and s
    double path_tol = 0.5;
};

/// Evaluates both sides of the summed cluster equation along a shrinking
/// path. At an equilibrium they would be equal; the right side grows without
/// bound as the cluster collapses while the left side stays in a finite band,
/// which is the obstruction to clustered equilibria. On the sphere every pair
/// must respect the antipodal guard Q_i(.)Q_j > -1 + epsilon.
ClusterDivergenceResult curved_cluster_divergence(const std::vector<double>& masses,
                                                  const RotationGenerator& gen,
                                                  const std::vector<int>& cluster,
                                                  const ClusterPath& path, double epsilon,
                                                  const std::vector<double>& s_grid,
                                                  const ClusterDivergenceOptions& opts = {});

/// Least-squares slope of log|y| against log(x) over the points with
/// x <= 10 * min(x) (the final decade of a shrinking grid).
double fit_loglog_slope_last_decade(const std::vector<double>& x,
                                    const std::vector<double>& y);

}  // namespace equilibra
