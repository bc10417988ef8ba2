#pragma once

#include <iosfwd>
#include <json.hpp>

#include "equilibra/certify.hpp"
#include "equilibra/config.hpp"
#include "equilibra/dynamics.hpp"
#include "equilibra/equilibria.hpp"

namespace equilibra {

nlohmann::json to_json(const AdmissibilityReport& report);
nlohmann::json to_json(const RESolution& sol);
nlohmann::json to_json(const VerifyReport& report);
nlohmann::json to_json(const ContinuationFamily& family);
nlohmann::json to_json(const SeparationCertificate& cert);
nlohmann::json to_json(const BoundednessCertificate& cert);
nlohmann::json to_json(const DivergenceProbeResult& result);
nlohmann::json to_json(const ClusterIdentityResult& result);
nlohmann::json to_json(const ClusterDivergenceResult& result);

nlohmann::json problem_to_json(const REProblem& problem);
REProblem problem_from_json(const nlohmann::json& j);

/// Full find-command output: {"problem": ..., "solution": ...}.
nlohmann::json solution_document(const REProblem& problem, const RESolution& sol,
                                 const VerifyReport& verify_report);
/// Reads back the problem and solved positions of a solution document.
void solution_from_document(const nlohmann::json& j, REProblem& problem,
                            std::vector<Eigen::VectorXd>& positions);

// CSV writers; headers and column order are frozen interfaces.
// family: step,param_value,residual_norm,min_separation,max_norm,newton_iterations
void write_family_csv(std::ostream& os, const ContinuationFamily& family);
// flat probe: s,required_bound,remainder,triangle_ratio
void write_divergence_csv(std::ostream& os, const DivergenceProbeResult& result);
// cluster probe: s,lhs,rhs
void write_cluster_csv(std::ostream& os, const ClusterDivergenceResult& result);
// trajectory: t,body,q1..qD,v1..vD
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
nlohmann::json trajectory_drift_json(const Trajectory& traj);

}  // namespace equilibra
