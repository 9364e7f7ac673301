#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ajsim/config.hpp"
#include "ajsim/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Euler-Maruyama simulation of a jump-extended Ait-Sahalia short-rate model"};
    app.set_version_flag("--version", std::string(ajsim::version()));

    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    unsigned threads = 0;
    std::uint64_t seed = 0;

    app.add_option("task", command,
                   "simulate | moments | occupancy | asymptotics | lemma22 | converge | bond | barrier | validate")
        ->required();
    app.add_option("--config,-c", config_path, "experiment TOML file")->required()->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override a config key, e.g. --set model.sigma=0.3")->allow_extra_args(false);
    auto* out_opt = app.add_option("--out,-o", out_dir, "output directory (overrides output.dir)");
    app.add_option("--threads,-j", threads, "worker threads (default: AJSIM_THREADS, then all cores)");
    auto* seed_opt = app.add_option("--seed", seed, "ensemble seed (overrides ensemble.seed)");

    CLI11_PARSE(app, argc, argv);

    const bool validate_only = command == "validate";
    if (!validate_only && !ajsim::parse_task(command)) {
        std::cerr << "unknown task '" << command << "'\n";
        return ajsim::kExitError;
    }
    if (!validate_only) overrides.push_back("task.name=\"" + command + "\"");

    ajsim::ExperimentConfig config;
    try {
        config = ajsim::load_config(config_path, overrides);
    } catch (const ajsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ajsim::kExitInvalidConfig;
    }

    if (validate_only) {
        const auto report = ajsim::validate_report(config);
        std::cout << report.dump(2) << '\n';
        for (const auto& err : report["errors"]) {
            std::cerr << "config error: " << err["field"].get<std::string>() << ": "
                      << err["message"].get<std::string>() << '\n';
        }
        return report["valid"].get<bool>() ? ajsim::kExitOk : ajsim::kExitInvalidConfig;
    }

    ajsim::RunOptions options;
    options.threads = threads;
    if (*out_opt) options.out_dir = out_dir;
    if (*seed_opt) options.seed = seed;
    return ajsim::run(config, options, std::cerr);
}
