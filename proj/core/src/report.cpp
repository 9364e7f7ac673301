#include "ajsim/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ajsim {

std::string params_hash(const ModelParams& p) {
    char buf[512];
    const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                                  p.a_neg1, p.a0, p.a1, p.a2, p.gamma, p.sigma, p.rho, p.delta, p.lambda, p.y0);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 0x100000001b3ULL;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

RecordContext record_context(const ModelParams& params, std::uint64_t seed, const SimGrid& grid) {
    return {params_hash(params), seed, grid.horizon(), grid.dt(), grid.steps()};
}

nlohmann::json to_json(const EstimateWithCI& e) {
    return {
        {"point", e.point},       {"std_error", e.std_error}, {"ci_low", e.ci_low},
        {"ci_high", e.ci_high},   {"n_paths", e.n_paths},     {"n_excluded", e.n_excluded},
    };
}

nlohmann::json estimator_record(std::string_view estimator, const EstimateWithCI& e, const RecordContext& ctx) {
    nlohmann::json j = to_json(e);
    j["estimator"] = estimator;
    j["params_hash"] = ctx.params_hash;
    j["seed"] = ctx.seed;
    j["grid"] = {{"horizon", ctx.horizon}, {"dt", ctx.dt}, {"steps", ctx.steps}};
    return j;
}

nlohmann::json to_json(const ModelParams& p) {
    return {
        {"a_neg1", p.a_neg1}, {"a0", p.a0},   {"a1", p.a1},       {"a2", p.a2},         {"gamma", p.gamma},
        {"sigma", p.sigma},   {"rho", p.rho}, {"delta", p.delta}, {"lambda", p.lambda}, {"y0", p.y0},
    };
}

nlohmann::json to_json(const RegimeReport& r) {
    return {
        {"p", r.p},
        {"moment_ok", r.moment_ok},
        {"moment_branch", to_string(r.moment_branch)},
        {"second_moment_corollary_ok", r.second_moment_corollary_ok},
        {"inverse_moment_ok", r.inverse_moment_ok},
        {"pathwise_lower_ok", r.pathwise_lower_ok},
        {"pathwise_upper_ok", r.pathwise_upper_ok},
        {"time_avg_ok", r.time_avg_ok},
    };
}

nlohmann::json to_json(const ExperimentConfig& c) {
    const auto& t = c.params;
    return {
        {"task",
         {{"name", to_string(c.task)},
          {"p", t.p},
          {"avg_exponents", t.avg_exponents},
          {"n1", t.n1},
          {"epsilon", t.epsilon},
          {"n1_search", t.n1_search},
          {"t_large", t.t_large},
          {"band", t.band},
          {"spacing", t.spacing},
          {"integral_lambdas", t.integral_lambdas},
          {"integral_horizons", t.integral_horizons},
          {"integrands", t.integrands},
          {"xi", t.xi},
          {"ref_factor", t.ref_factor},
          {"strike", t.strike},
          {"barrier", t.barrier},
          {"strikes", t.strikes},
          {"theta", t.theta}}},
        {"model", to_json(c.model)},
        {"grid", {{"horizon", c.grid.horizon}, {"dt", c.grid.dt}, {"dt_levels", c.grid.dt_levels}}},
        {"ensemble", {{"n_paths", c.ensemble.n_paths}, {"seed", c.ensemble.seed}, {"refine", c.ensemble.refine}}},
        {"output", {{"dir", c.output.dir}, {"formats", c.output.formats}}},
    };
}

nlohmann::json to_json(const MomentBoundCheck& c) {
    return {
        {"initial", c.initial},   {"plateau", c.plateau},         {"ceiling", c.ceiling},
        {"worst_excess_se", c.worst_excess_se}, {"worst_node", c.worst_node}, {"ok", c.ok},
    };
}

nlohmann::json to_json(const InequalityResult& r) {
    return {{"name", r.name}, {"lhs", to_json(r.lhs)}, {"rhs", r.rhs}, {"margin", r.margin}, {"pass", r.pass}};
}

nlohmann::json to_json(const PoissonIntegralCheck& c) {
    nlohmann::json ineq = nlohmann::json::array();
    for (const auto& r : c.inequalities) ineq.push_back(to_json(r));
    return {
        {"lambda", c.lambda},
        {"horizon", c.horizon},
        {"integrand", to_string(c.integrand)},
        {"h_square_integral", c.h_square_integral},
        {"inequalities", std::move(ineq)},
        {"sup_dn_rederived", to_json(c.sup_dn_rederived)},
        {"pass", c.pass},
    };
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("csv header must not be empty");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
    filled_ = columns_;
}

CsvTable& CsvTable::row() {
    if (filled_ != columns_) throw std::logic_error("csv row is incomplete");
    filled_ = 0;
    ++rows_;
    return *this;
}

void CsvTable::separator() {
    if (filled_ >= columns_) throw std::logic_error("csv row has too many cells");
    if (filled_ > 0) text_ += ',';
    ++filled_;
}

CsvTable& CsvTable::cell(double x) {
    separator();
    text_ += format_double(x);
    if (filled_ == columns_) text_ += '\n';
    return *this;
}

CsvTable& CsvTable::cell(std::uint64_t x) {
    separator();
    text_ += std::to_string(x);
    if (filled_ == columns_) text_ += '\n';
    return *this;
}

CsvTable& CsvTable::cell(std::string_view s) {
    separator();
    text_ += s;
    if (filled_ == columns_) text_ += '\n';
    return *this;
}

void CsvTable::write(const std::filesystem::path& file) const {
    if (filled_ != columns_) throw std::logic_error("csv row is incomplete");
    write_text_file(file, text_);
}

void write_text_file(const std::filesystem::path& file, std::string_view text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

}  // namespace ajsim
