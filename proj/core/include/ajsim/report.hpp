#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ajsim/analysis.hpp"
#include "ajsim/config.hpp"
#include "ajsim/estimate.hpp"
#include "ajsim/model.hpp"
#include "ajsim/noise.hpp"

namespace ajsim {

/// FNV-1a (64 bit) over the model parameters printed with %.17g, as 16 hex digits.
std::string params_hash(const ModelParams& params);

/// Shortest round-trip decimal form of `x` ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);

/// Context shared by every estimator record of one run.
struct RecordContext {
    std::string params_hash;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
};

RecordContext record_context(const ModelParams& params, std::uint64_t seed, const SimGrid& grid);

nlohmann::json to_json(const EstimateWithCI& e);
/// Full estimator record: estimator name, params hash, seed, grid, point/SE/CI and exclusions.
nlohmann::json estimator_record(std::string_view estimator, const EstimateWithCI& e, const RecordContext& ctx);

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const RegimeReport& report);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const MomentBoundCheck& check);
nlohmann::json to_json(const InequalityResult& result);
nlohmann::json to_json(const PoissonIntegralCheck& check);

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row();
    CsvTable& cell(double x);
    CsvTable& cell(std::uint64_t x);
    CsvTable& cell(std::string_view text);

    std::size_t rows() const { return rows_; }
    const std::string& text() const { return text_; }
    void write(const std::filesystem::path& file) const;

private:
    void separator();

    std::size_t columns_ = 0;
    std::size_t rows_ = 0;
    std::size_t filled_ = 0;
    std::string text_;
};

/// Writes `text` exactly (binary mode, no newline translation).
void write_text_file(const std::filesystem::path& file, std::string_view text);

}  // namespace ajsim
