#include <CLI11.hpp>
#include <string>
#include <utility>

#include "equilibra/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"solver and certifier for relative equilibria of flat and curved n-body problems"};
    app.require_subcommand(1);

    const std::pair<const char*, const char*> commands[] = {
        {"validate_law", "check a force law against the admissibility conditions"},
        {"find", "solve for a relative equilibrium from a seed or explicit positions"},
        {"sweep", "trace a parameter family and issue separation/boundedness certificates"},
        {"certify", "run a divergence or identity probe and assert its invariants"},
        {"simulate", "integrate a configuration and report its rigidity"},
    };

    equilibra::cli::Options opts;
    std::string command;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config_path, "JSON run configuration")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory (default: cwd)");
        sub->add_option("--threads", opts.threads, "worker threads for probe batches");
        sub->callback([&command, name = name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? equilibra::cli::kExitOk : equilibra::cli::kExitConfig;
    }
    return equilibra::cli::run(command, opts);
}
