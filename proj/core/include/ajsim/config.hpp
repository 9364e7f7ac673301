#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ajsim/model.hpp"

namespace ajsim {

enum class Task { simulate, moments, occupancy, asymptotics, lemma22, converge, bond, barrier };

const char* to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

struct GridConfig {
    double horizon = 1.0;
    double dt = 1e-3;
    /// Step ladder for the convergence study and for price-vs-dt ladders.
    std::vector<double> dt_levels;

    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct EnsembleConfig {
    std::uint64_t n_paths = 1000;
    std::uint64_t seed = 1;
    std::uint64_t refine = 1;

    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

/// Task-specific knobs; each task reads only its own fields.
struct TaskConfig {
    // moments
    double p = 2.0;
    std::vector<double> avg_exponents{-2.0, 2.0};
    // occupancy
    double n1 = 2.0;
    double epsilon = 0.01;
    bool n1_search = true;
    // asymptotics (uses grid.dt as step)
    double t_large = 100.0;
    double band = 0.3;
    double spacing = 10.0;
    // lemma22 (ensemble.n_paths is the sample count)
    std::vector<double> integral_lambdas{0.5, 2.0, 10.0};
    std::vector<double> integral_horizons{0.5, 1.0, 2.0};
    std::vector<std::string> integrands{"constant", "identity"};
    // converge
    double xi = 0.01;
    std::uint64_t ref_factor = 256;
    // barrier
    double strike = 1.0;
    double barrier = 2.0;
    std::vector<double> strikes;
    // validate: Lyapunov exponent for the generator scan
    double theta = 0.5;

    friend bool operator==(const TaskConfig&, const TaskConfig&) = default;
};

struct OutputConfig {
    std::string dir = "ajsim-out";
    std::vector<std::string> formats{"json", "csv"};

    bool wants(std::string_view format) const;

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
    Task task = Task::simulate;
    ModelParams model;
    GridConfig grid;
    EnsembleConfig ensemble;
    TaskConfig params;
    OutputConfig output;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Malformed or out-of-range configuration; `field` is the dotted path of the first offender.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Parses TOML text. Each override has the form "dotted.key=value"; values use TOML syntax and
/// fall back to a plain string. Throws ConfigError on syntax errors, unknown keys and type
/// mismatches. Ranges are not checked here; see validate_config.
ExperimentConfig parse_config(std::string_view toml_text, std::span<const std::string> overrides = {});
ExperimentConfig load_config(const std::filesystem::path& file, std::span<const std::string> overrides = {});

/// TOML text that parses back to an identical configuration.
std::string emit_config(const ExperimentConfig& config);

/// Every range violation, one issue per invariant, addressed by field path.
std::vector<ValidationIssue> validate_config(const ExperimentConfig& config);

}  // namespace ajsim
