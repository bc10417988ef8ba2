#pragma once

#include <string>

#include "equilibra/config.hpp"

namespace equilibra::cli {

// exit-code contract: 0 success, 1 usage/config error, 2 mathematical failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitMath = 2;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
};

/// The five commands. Each parses nothing itself (the config arrives ready),
/// writes its reports under opts.out_dir and returns an exit code; anything
/// thrown is mapped by run(). Output files per command:
///   validate_law: admissibility.json
///   find:         solution.json
///   sweep:        family.csv, family.json, separation.json,
///                 boundedness.json (when requested)
///   certify:      probe_divergence.json/.csv | probe_identity.json |
///                 probe_cluster.json/.csv, by probe kind
///   simulate:     trajectory.csv, trajectory_drift.json, rigidity.json
int cmd_validate_law(const RunConfig& config, const Options& opts);
int cmd_find(const RunConfig& config, const Options& opts);
int cmd_sweep(const RunConfig& config, const Options& opts);
int cmd_certify(const RunConfig& config, const Options& opts);
int cmd_simulate(const RunConfig& config, const Options& opts);

/// Loads the config, dispatches on the command name and maps exceptions to
/// the exit-code contract. Mathematical failures additionally leave an
/// error.json naming the error code, so scripted callers need not scrape
/// stderr. Logging verbosity comes from EQUILIBRA_LOG (error|info|debug).
int run(const std::string& command, const Options& opts);

}  // namespace equilibra::cli
