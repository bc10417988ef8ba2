#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "equilibra/certify.hpp"
#include "equilibra/equilibria.hpp"
#include "equilibra/forcelaw.hpp"
#include "equilibra/seeds.hpp"

namespace equilibra {

/// Parsed and schema-checked run configuration. Parsing is strict: unknown
/// keys anywhere in the document are ConfigError, as are missing required
/// keys or wrong types. Which blocks are required depends on the command.
struct SweepConfig {
    ContinuationParameter parameter;
    double from = 0, to = 0;
    int points = 0;
    bool boundedness = false;
    double trust_radius = 1.0;
};

struct ProbeConfig {
    std::string kind;  // divergence_flat | cluster_identity | cluster_divergence
    double s_min = 1e-4, s_max = 1e-1;
    int points = 25;
    double omega = 1.0;
    std::vector<double> masses;                  // probe bodies, defaults per kind
    std::vector<Eigen::VectorXd> far_bodies;     // divergence_flat: fixed far positions
    double epsilon = 0.1;                        // cluster_divergence sphere guard
    std::string space = "sphere";                // cluster probes: sphere | hyperboloid
    int count = 100;                             // cluster_identity batch size
    int n_max = 6;                               // cluster_identity max bodies
};

struct SimulateConfig {
    double periods = 10;        // horizon in characteristic periods 2 pi / sqrt(c2)
    double rel_tol = 1e-10;
    int n_samples = 201;
    double drift_bound = 1e-6;
    double constraint_drift_bound = 1e-9;  // curved spaces only
};

struct RunConfig {
    std::optional<SpaceForm> space;
    std::optional<ForceLaw> law;
    std::optional<AdmissibilityOptions> admissibility;
    std::vector<double> masses;
    std::optional<double> generator_omega;
    std::optional<Eigen::MatrixXd> generator_matrix;
    std::optional<std::string> seed_name;
    nlohmann::json seed_params;  // object; validated when the seed is built
    std::optional<std::vector<Eigen::VectorXd>> positions;
    double scale_positions = 1.0;
    SolveOptions solver;
    std::optional<SweepConfig> sweep;
    std::optional<ProbeConfig> probe;
    std::optional<SimulateConfig> simulate;
    std::optional<std::string> solution_path;
    std::uint64_t rng_seed = 20260815;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Force-law (de)serialization. Custom laws are referenced by registry name;
/// the registry ships "sin_inv_x" (f = sin(1/x)), a bounded-oscillation
/// kernel used to demonstrate admissibility rejection.
ForceLaw law_from_json(const nlohmann::json& j);
nlohmann::json law_to_json(const ForceLaw& law);

SpaceForm space_from_json(const nlohmann::json& j);
nlohmann::json space_to_json(const SpaceForm& space);

/// Builds a named seed from its parameter block (strict keys). The optional
/// law applies to the flat seeds and defaults to the inverse-cube kernel.
SeedResult build_seed(const std::string& name, const nlohmann::json& params,
                      const std::optional<ForceLaw>& law);

}  // namespace equilibra
