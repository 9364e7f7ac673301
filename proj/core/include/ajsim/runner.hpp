#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ajsim/config.hpp"
#include "ajsim/report.hpp"

namespace ajsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitRuntimeAbort = 3;

/// Code version recorded in every manifest.
const char* version();

struct RunOptions {
    unsigned threads = 0;                          ///< 0: AJSIM_THREADS, then hardware concurrency
    std::optional<std::filesystem::path> out_dir;  ///< overrides output.dir
    std::optional<std::uint64_t> seed;             ///< overrides ensemble.seed
};

/// Numerical outcome of one task. `result` carries no timestamps or thread counts.
struct TaskOutput {
    nlohmann::json result;
    std::optional<CsvTable> curve;
    std::optional<NoiseArchive> archive;
};

/// Runs the configured task in memory. Progress lines go to `log`. Throws RuntimeAbort when
/// every path overflows and ConfigError when the config fails validation.
TaskOutput run_task(const ExperimentConfig& config, unsigned threads, std::ostream& log);

/// Validates, runs, and writes manifest.json, result.json and the optional curve.csv / paths.bin.
/// Returns the process exit status; messages go to `log`.
int run(ExperimentConfig config, const RunOptions& options, std::ostream& log);

/// Pure check: validation issues, regime status, warnings and the generator supremum for
/// task.theta. Never simulates. `all_green` means valid, with the moment bound and the
/// second-moment corollary both satisfied; the pathwise and time-average hypotheses are
/// mutually exclusive in rho and appear only as warnings.
nlohmann::json validate_report(const ExperimentConfig& config);

}  // namespace ajsim
