#include "equilibra/reports.hpp"

#include <iomanip>
#include <ostream>

namespace equilibra {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json positions_to_json(const std::vector<Eigen::VectorXd>& Q) {
    json a = json::array();
    for (const auto& q : Q) a.push_back(vector_to_json(q));
    return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Eigen::MatrixXd M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
    return M;
}

// infinity is not representable in JSON; fall back to a string marker
json finite_or_marker(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const AdmissibilityReport& report) {
    json conditions = json::array();
    for (const auto& c : report.conditions)
        conditions.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return json{{"pass", report.pass()},
                {"conditions", conditions},
                {"observed_limit_sign", report.observed_limit_sign},
                {"empirical_compactness", report.empirical_compactness},
                {"grid",
                 {{"delta", report.options.delta},
                  {"x_max", report.options.x_max},
                  {"grid_size", report.options.grid_size},
                  {"div_x", report.options.div_x},
                  {"div_factor", report.options.div_factor}}}};
}

json to_json(const RESolution& sol) {
    json j{{"space", space_to_json(sol.space)},
           {"masses", sol.masses},
           {"positions", positions_to_json(sol.positions)},
           {"residual_norm", sol.residual_norm},
           {"newton_iterations", sol.newton_iterations},
           {"gauge", sol.gauge},
           {"gauge_coord", sol.gauge_coord},
           {"gauge_value", sol.gauge_value},
           {"jacobian_condition", finite_or_marker(sol.jacobian_condition)}};
    if (sol.centroid_residual) j["centroid_residual"] = *sol.centroid_residual;
    return j;
}

json to_json(const VerifyReport& report) {
    json j{{"is_re", report.is_re},
           {"residual_norm", finite_or_marker(report.residual_norm)},
           {"min_separation", report.min_separation},
           {"max_norm", report.max_norm}};
    if (report.min_inner) j["min_inner"] = *report.min_inner;
    if (report.max_inner) j["max_inner"] = *report.max_inner;
    if (!report.diagnostic.empty()) j["diagnostic"] = report.diagnostic;
    return j;
}

namespace {

const char* parameter_name(ContinuationParameterKind kind) {
    switch (kind) {
        case ContinuationParameterKind::Omega: return "omega";
        case ContinuationParameterKind::MassIndex: return "mass";
        case ContinuationParameterKind::ExponentAlpha: return "alpha";
        case ContinuationParameterKind::ExponentBeta: return "beta";
    }
    return "?";
}

}  // namespace

json to_json(const ContinuationFamily& family) {
    json steps = json::array();
    for (size_t k = 0; k < family.steps.size(); ++k) {
        const auto& st = family.steps[k];
        steps.push_back({{"step", k},
                         {"param_value", st.param_value},
                         {"residual_norm", st.solution.residual_norm},
                         {"min_separation", st.min_separation},
                         {"max_norm", st.max_norm},
                         {"newton_iterations", st.solution.newton_iterations},
                         {"positions", positions_to_json(st.solution.positions)}});
    }
    json j{{"parameter", parameter_name(family.parameter.kind)},
           {"grid", family.grid},
           {"solve_tol", family.solve_tol},
           {"complete", family.complete},
           {"steps", steps}};
    if (family.parameter.kind == ContinuationParameterKind::MassIndex)
        j["mass_index"] = family.parameter.index;
    if (!family.abort_reason.empty()) j["abort_reason"] = family.abort_reason;
    return j;
}

json to_json(const SeparationCertificate& cert) {
    return json{{"c_hat", cert.c_hat},
                {"argmin_step", cert.argmin_step},
                {"argmin_pair", {cert.argmin_i, cert.argmin_j}},
                {"stability_ratio", cert.stability_ratio}};
}

json to_json(const BoundednessCertificate& cert) {
    return json{{"C_hat", cert.C_hat},
                {"compactness_flag", cert.compactness_flag},
                {"argmax_step", cert.argmax_step},
                {"argmax_body", cert.argmax_body}};
}

json to_json(const DivergenceProbeResult& result) {
    return json{{"s", result.s},
                {"required_bound", result.required_bound},
                {"remainder", result.remainder},
                {"triangle_ratio", result.triangle_ratio},
                {"slope", result.slope},
                {"triangle_ratio_max", result.triangle_ratio_max},
                {"c2", result.c2}};
}

json to_json(const ClusterIdentityResult& result) {
    return json{{"cluster", result.cluster},
                {"residual_rel", result.residual_rel},
                {"residual_rel_alt", result.residual_rel_alt},
                {"scale", result.scale},
                {"denominator_resolution", result.denominator_resolution}};
}

json to_json(const ClusterDivergenceResult& result) {
    return json{{"cluster", result.cluster},
                {"s", result.s},
                {"lhs", result.lhs},
                {"rhs", result.rhs},
                {"slope", result.slope},
                {"lhs_band", {result.lhs_band_lo, result.lhs_band_hi}},
                {"epsilon", result.epsilon}};
}

json problem_to_json(const REProblem& problem) {
    json j{{"space", space_to_json(problem.space)},
           {"masses", problem.masses},
           {"generator", matrix_to_json(problem.gen.G())}};
    if (problem.law) j["law"] = law_to_json(*problem.law);
    return j;
}

REProblem problem_from_json(const json& j) {
    REProblem p;
    p.space = space_from_json(j.at("space"));
    p.masses = j.at("masses").get<std::vector<double>>();
    if (j.contains("law")) p.law = law_from_json(j.at("law"));
    p.gen = validate_generator(matrix_from_json(j.at("generator")), p.space);
    p.validate();
    return p;
}

json solution_document(const REProblem& problem, const RESolution& sol,
                       const VerifyReport& verify_report) {
    return json{{"problem", problem_to_json(problem)},
                {"solution", to_json(sol)},
                {"verify", to_json(verify_report)}};
}

void solution_from_document(const json& j, REProblem& problem,
                            std::vector<Eigen::VectorXd>& positions) {
    problem = problem_from_json(j.at("problem"));
    positions.clear();
    for (const auto& q : j.at("solution").at("positions"))
        positions.push_back(vector_from_json(q));
}

namespace {

struct CsvStream {
    std::ostream& os;
    explicit CsvStream(std::ostream& s) : os(s) {
        os << std::setprecision(17);  // round-trip doubles
    }
};

}  // namespace

void write_family_csv(std::ostream& os, const ContinuationFamily& family) {
    CsvStream csv(os);
    os << "step,param_value,residual_norm,min_separation,max_norm,newton_iterations\n";
    for (size_t k = 0; k < family.steps.size(); ++k) {
        const auto& st = family.steps[k];
        os << k << ',' << st.param_value << ',' << st.solution.residual_norm << ','
           << st.min_separation << ',' << st.max_norm << ','
           << st.solution.newton_iterations << '\n';
    }
}

void write_divergence_csv(std::ostream& os, const DivergenceProbeResult& result) {
    CsvStream csv(os);
    os << "s,required_bound,remainder,triangle_ratio\n";
    for (size_t k = 0; k < result.s.size(); ++k)
        os << result.s[k] << ',' << result.required_bound[k] << ',' << result.remainder[k]
           << ',' << result.triangle_ratio[k] << '\n';
}

void write_cluster_csv(std::ostream& os, const ClusterDivergenceResult& result) {
    CsvStream csv(os);
    os << "s,lhs,rhs\n";
    for (size_t k = 0; k < result.s.size(); ++k)
        os << result.s[k] << ',' << result.lhs[k] << ',' << result.rhs[k] << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    CsvStream csv(os);
    const int dim = traj.samples.empty() || traj.samples[0].positions.empty()
                        ? 0
                        : static_cast<int>(traj.samples[0].positions[0].size());
    os << "t,body";
    for (int d = 1; d <= dim; ++d) os << ",q" << d;
    for (int d = 1; d <= dim; ++d) os << ",v" << d;
    os << '\n';
    for (const auto& sample : traj.samples) {
        for (size_t i = 0; i < sample.positions.size(); ++i) {
            os << sample.t << ',' << i;
            for (int d = 0; d < dim; ++d) os << ',' << sample.positions[i](d);
            for (int d = 0; d < dim; ++d) os << ',' << sample.velocities[i](d);
            os << '\n';
        }
    }
}

json trajectory_drift_json(const Trajectory& traj) {
    return json{{"max_constraint_drift", traj.max_constraint_drift},
                {"max_tangency_drift", traj.max_tangency_drift},
                {"steps_accepted", traj.steps_accepted},
                {"steps_rejected", traj.steps_rejected},
                {"projections", traj.projections},
                {"samples", traj.samples.size()}};
}

}  // namespace equilibra
