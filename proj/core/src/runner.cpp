#include "ajsim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <ostream>
#include <stdexcept>

#include "ajsim/analysis.hpp"
#include "ajsim/em.hpp"
#include "ajsim/finance.hpp"
#include "ajsim/parallel.hpp"

#ifndef AJSIM_VERSION
#define AJSIM_VERSION "0.0.0"
#endif

namespace ajsim {

namespace {

using nlohmann::json;

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Ensemble make_ensemble(const ExperimentConfig& cfg, unsigned threads) {
    Ensemble e;
    e.n_paths = cfg.ensemble.n_paths;
    e.seed = cfg.ensemble.seed;
    e.refine = cfg.ensemble.refine;
    e.threads = threads;
    return e;
}

double regime_order(const ExperimentConfig& cfg) { return cfg.params.p >= 2.0 ? cfg.params.p : 2.0; }

json regime_block(const ExperimentConfig& cfg) {
    const RegimeReport report = regime_check(cfg.model, regime_order(cfg));
    return {{"regime", to_json(report)}, {"warnings", regime_warnings(report, cfg.model)}};
}

void add_estimate_row(CsvTable& csv, const EstimateWithCI& e) {
    csv.cell(e.point).cell(e.std_error).cell(e.ci_low).cell(e.ci_high);
}

/// Ensembles for a dt ladder, all driven by noise generated on the finest ladder step.
std::vector<std::pair<SimGrid, Ensemble>> coupled_ladder(const ExperimentConfig& cfg, const Ensemble& base) {
    std::vector<std::pair<SimGrid, Ensemble>> out;
    if (cfg.grid.dt_levels.empty()) return out;
    const double finest = *std::min_element(cfg.grid.dt_levels.begin(), cfg.grid.dt_levels.end());
    for (std::size_t i = 0; i < cfg.grid.dt_levels.size(); ++i) {
        const double dt = cfg.grid.dt_levels[i];
        const double ratio = dt / finest;
        const double factor = std::round(ratio);
        if (std::fabs(ratio - factor) > 1e-9 * ratio) {
            throw ConfigError("grid.dt_levels[" + std::to_string(i) + "]",
                              "ladder steps must be integer multiples of the finest step");
        }
        Ensemble e = base;
        e.refine = base.refine * static_cast<std::size_t>(factor);
        out.emplace_back(SimGrid::from_dt(cfg.grid.horizon, dt), e);
    }
    return out;
}

void run_simulate(const ExperimentConfig& cfg, const SimGrid& grid, const Ensemble& ens, TaskOutput& out) {
    std::vector<DrivingNoise> noise(ens.n_paths);
    std::vector<EmPath> paths(ens.n_paths);
    parallel_for(ens.n_paths, ens.threads, [&](std::size_t i) {
        noise[i] = ensemble_noise(grid, cfg.model.lambda, ens, i);
        paths[i] = simulate_path(cfg.model, noise[i]);
    });

    const RecordContext ctx = record_context(cfg.model, ens.seed, grid);
    json summaries = json::array();
    std::vector<double> finals;
    std::size_t aborted = 0;
    std::size_t negative = 0;
    CsvTable csv({"path_id", "t", "Y"});
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const EmPath& p = paths[i];
        const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
        summaries.push_back({
            {"path_id", i},
            {"final", p.values.back()},
            {"min", *lo},
            {"max", *hi},
            {"jumps", noise[i].total_jumps()},
            {"negative_iterates", p.count(EventKind::negative_iterate)},
            {"floor_clamps", p.count(EventKind::floor_clamp)},
            {"aborted", p.aborted()},
        });
        if (p.aborted()) {
            ++aborted;
        } else {
            finals.push_back(p.values.back());
        }
        if (p.has_negative()) ++negative;
        if (cfg.output.wants("csv")) {
            for (std::size_t n = 0; n < p.values.size(); ++n) {
                csv.row().cell(static_cast<std::uint64_t>(i)).cell(grid.time(n)).cell(p.values[n]);
            }
        }
    }
    if (finals.empty()) throw RuntimeAbort("simulate: every path overflowed");
    out.result["terminal_mean"] = estimator_record("terminal_mean", estimate_mean(finals, aborted), ctx);
    out.result["n_aborted"] = aborted;
    out.result["n_negative_paths"] = negative;
    out.result["paths"] = std::move(summaries);
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
    if (cfg.output.wants("bin")) {
        NoiseArchive archive;
        archive.seed = ens.seed;
        archive.lambda = cfg.model.lambda;
        archive.grid = grid;
        archive.paths = std::move(noise);
        archive.values.reserve(paths.size());
        for (auto& p : paths) archive.values.push_back(std::move(p.values));
        out.archive = std::move(archive);
    }
}

void run_moments(const ExperimentConfig& cfg, const SimGrid& grid, const Ensemble& ens, TaskOutput& out) {
    const MomentCurve curve = moment_curve(cfg.model, cfg.params.p, grid, ens);
    const MomentBoundCheck check = check_moment_bound(curve, cfg.model.y0);
    const EstimateWithCI avg = time_avg_moment(cfg.model, cfg.params.avg_exponents, grid, ens);
    const RecordContext ctx = record_context(cfg.model, ens.seed, grid);

    std::vector<double> point;
    std::vector<double> se;
    CsvTable csv({"t", "point", "std_error", "ci_low", "ci_high"});
    for (std::size_t n = 0; n < curve.nodes.size(); ++n) {
        point.push_back(curve.nodes[n].point);
        se.push_back(curve.nodes[n].std_error);
        csv.row().cell(curve.times[n]);
        add_estimate_row(csv, curve.nodes[n]);
    }
    out.result["p"] = curve.p;
    out.result["n_paths"] = curve.n_paths;
    out.result["n_excluded"] = curve.n_excluded;
    out.result["n_negative_paths"] = curve.n_negative_paths;
    out.result["moment_warnings"] = curve.warnings;
    out.result["curve"] = {{"t", curve.times}, {"point", point}, {"std_error", se}};
    out.result["terminal_moment"] = estimator_record("moment_curve", curve.nodes.back(), ctx);
    out.result["bound_check"] = to_json(check);
    out.result["time_avg_moment"] = estimator_record("time_avg_moment", avg, ctx);
    out.result["time_avg_exponents"] = cfg.params.avg_exponents;
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void run_occupancy(const ExperimentConfig& cfg, const SimGrid& grid, const Ensemble& ens, TaskOutput& out) {
    const RecordContext ctx = record_context(cfg.model, ens.seed, grid);
    const EstimateWithCI at_n1 = occupancy_probability(cfg.model, grid, ens, cfg.params.n1);
    out.result["n1"] = cfg.params.n1;
    out.result["occupancy"] = estimator_record("occupancy_probability", at_n1, ctx);
    CsvTable csv({"n1", "point", "std_error", "ci_low", "ci_high"});
    if (cfg.params.n1_search) {
        const OccupancySearch search = occupancy_search(cfg.model, grid, ens, cfg.params.epsilon, cfg.params.n1);
        json steps = json::array();
        for (std::size_t i = 0; i < search.n1_values.size(); ++i) {
            json rec = estimator_record("occupancy_probability", search.estimates[i], ctx);
            rec["n1"] = search.n1_values[i];
            steps.push_back(std::move(rec));
            csv.row().cell(search.n1_values[i]);
            add_estimate_row(csv, search.estimates[i]);
        }
        out.result["search"] = {
            {"epsilon", cfg.params.epsilon},
            {"steps", std::move(steps)},
            {"n1_found", search.n1_found ? json(*search.n1_found) : json(nullptr)},
        };
    } else {
        csv.row().cell(cfg.params.n1);
        add_estimate_row(csv, at_n1);
    }
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void run_asymptotics(const ExperimentConfig& cfg, const Ensemble& ens, TaskOutput& out) {
    const LogRatioSummary s =
        pathwise_log_ratio(cfg.model, cfg.params.t_large, cfg.grid.dt, ens, cfg.params.band, cfg.params.spacing);
    const RecordContext ctx =
        record_context(cfg.model, ens.seed, SimGrid::from_dt(cfg.params.t_large, cfg.grid.dt));
    out.result["t_large"] = cfg.params.t_large;
    out.result["band"] = s.band;
    out.result["spacing"] = cfg.params.spacing;
    out.result["n_samples"] = s.n_samples;
    out.result["n_inside"] = s.n_inside;
    out.result["n_nonpositive"] = s.n_nonpositive;
    out.result["n_paths"] = s.n_paths;
    out.result["n_excluded"] = s.n_excluded;
    out.result["min_ratio"] = s.min_ratio;
    out.result["max_ratio"] = s.max_ratio;
    out.result["fraction_inside"] = estimator_record("pathwise_log_ratio", s.fraction_inside, ctx);
    out.result["sample_times"] = s.sample_times;
    out.result["mean_ratio"] = s.mean_ratio;
    CsvTable csv({"t", "mean_ratio"});
    for (std::size_t i = 0; i < s.sample_times.size(); ++i) csv.row().cell(s.sample_times[i]).cell(s.mean_ratio[i]);
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void run_poisson_integrals(const ExperimentConfig& cfg, const Ensemble& ens, TaskOutput& out) {
    json checks = json::array();
    bool all_pass = true;
    CsvTable csv({"lambda", "horizon", "integrand", "inequality", "lhs", "std_error", "rhs", "margin", "pass"});
    auto add_row = [&](const PoissonIntegralCheck& c, const InequalityResult& r) {
        csv.row().cell(c.lambda).cell(c.horizon).cell(to_string(c.integrand)).cell(r.name);
        csv.cell(r.lhs.point).cell(r.lhs.std_error).cell(r.rhs).cell(r.margin).cell(r.pass ? "true" : "false");
    };
    for (double lambda : cfg.params.integral_lambdas) {
        for (double horizon : cfg.params.integral_horizons) {
            for (const auto& name : cfg.params.integrands) {
                const Integrand h = name == "identity" ? Integrand::identity : Integrand::constant;
                const PoissonIntegralCheck c =
                    poisson_integral_inequality_check(lambda, horizon, ens.n_paths, ens.seed, h, ens.threads);
                all_pass = all_pass && c.pass;
                for (const auto& r : c.inequalities) add_row(c, r);
                add_row(c, c.sup_dn_rederived);
                checks.push_back(to_json(c));
            }
        }
    }
    out.result["n_samples"] = ens.n_paths;
    out.result["seed"] = ens.seed;
    out.result["checks"] = std::move(checks);
    out.result["pass"] = all_pass;
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void run_converge(const ExperimentConfig& cfg, const Ensemble& ens, TaskOutput& out, std::ostream& log) {
    const ConvergenceReport r = convergence_in_probability(cfg.model, cfg.grid.horizon, cfg.params.xi,
                                                           cfg.grid.dt_levels, ens, cfg.params.ref_factor);
    const SimGrid ref = SimGrid::from_dt(cfg.grid.horizon, r.dt_ref);
    json levels = json::array();
    CsvTable csv({"dt", "factor", "exceed_step", "exceed_step_se", "exceed_continuous", "exceed_continuous_se",
                  "exceed_interp_gap", "exceed_interp_gap_se", "sup_sq_step", "sup_sq_step_se", "sup_sq_continuous",
                  "sup_sq_continuous_se", "sup_sq_interp_gap", "sup_sq_interp_gap_se"});
    for (const auto& lv : r.levels) {
        const RecordContext ctx = record_context(cfg.model, ens.seed, SimGrid::from_dt(cfg.grid.horizon, lv.dt));
        levels.push_back({
            {"dt", lv.dt},
            {"factor", lv.factor},
            {"exceed_step", estimator_record("exceedance_step", lv.exceed_step, ctx)},
            {"exceed_continuous", estimator_record("exceedance_continuous", lv.exceed_continuous, ctx)},
            {"exceed_interp_gap", estimator_record("exceedance_interp_gap", lv.exceed_interp_gap, ctx)},
            {"sup_sq_step", estimator_record("sup_sq_step", lv.sup_sq_step, ctx)},
            {"sup_sq_continuous", estimator_record("sup_sq_continuous", lv.sup_sq_continuous, ctx)},
            {"sup_sq_interp_gap", estimator_record("sup_sq_interp_gap", lv.sup_sq_interp_gap, ctx)},
        });
        csv.row().cell(lv.dt).cell(static_cast<std::uint64_t>(lv.factor));
        for (const auto* e : {&lv.exceed_step, &lv.exceed_continuous, &lv.exceed_interp_gap, &lv.sup_sq_step,
                              &lv.sup_sq_continuous, &lv.sup_sq_interp_gap}) {
            csv.cell(e->point).cell(e->std_error);
        }
        log << "converge: dt=" << format_double(lv.dt) << " P(exceed)=" << format_double(lv.exceed_step.point)
            << " +/- " << format_double(lv.exceed_step.std_error)
            << " E sup|Y-Ybar|^2=" << format_double(lv.sup_sq_interp_gap.point) << '\n';
    }
    out.result["xi"] = r.xi;
    out.result["horizon"] = r.horizon;
    out.result["dt_ref"] = r.dt_ref;
    out.result["ref_steps"] = ref.steps();
    out.result["levels"] = std::move(levels);
    out.result["monotone_ok"] = r.monotone_ok;
    out.result["gap_trend_ok"] = r.gap_trend_ok;
    out.result["n_paths"] = r.n_paths;
    out.result["n_excluded"] = r.n_excluded;
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void run_bond(const ExperimentConfig& cfg, const SimGrid& grid, const Ensemble& ens, TaskOutput& out) {
    const BondSpec spec{cfg.grid.horizon};
    const EstimateWithCI price = bond_price(cfg.model, spec, grid, ens);
    out.result["maturity"] = spec.maturity;
    out.result["price"] = estimator_record("bond_price", price, record_context(cfg.model, ens.seed, grid));
    CsvTable csv({"ladder", "dt", "point", "std_error", "ci_low", "ci_high"});
    csv.row().cell("base").cell(grid.dt());
    add_estimate_row(csv, price);
    json ladder = json::array();
    for (const auto& [g, e] : coupled_ladder(cfg, ens)) {
        const EstimateWithCI p = bond_price(cfg.model, spec, g, e);
        ladder.push_back(estimator_record("bond_price", p, record_context(cfg.model, ens.seed, g)));
        csv.row().cell("dt").cell(g.dt());
        add_estimate_row(csv, p);
    }
    out.result["dt_ladder"] = std::move(ladder);
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void run_barrier(const ExperimentConfig& cfg, const SimGrid& grid, const Ensemble& ens, TaskOutput& out) {
    const BarrierOptionSpec spec{cfg.params.strike, cfg.params.barrier, cfg.grid.horizon};
    const EstimateWithCI price = barrier_option_price(cfg.model, spec, grid, ens);
    const RecordContext ctx = record_context(cfg.model, ens.seed, grid);
    out.result["strike"] = spec.strike;
    out.result["barrier"] = spec.barrier;
    out.result["maturity"] = spec.maturity;
    out.result["price"] = estimator_record("barrier_option_price", price, ctx);
    CsvTable csv({"ladder", "dt", "strike", "point", "std_error", "ci_low", "ci_high"});
    csv.row().cell("base").cell(grid.dt()).cell(spec.strike);
    add_estimate_row(csv, price);

    json strikes = json::array();
    for (double k : cfg.params.strikes) {
        BarrierOptionSpec s = spec;
        s.strike = k;
        const EstimateWithCI p = barrier_option_price(cfg.model, s, grid, ens);
        json rec = estimator_record("barrier_option_price", p, ctx);
        rec["strike"] = k;
        strikes.push_back(std::move(rec));
        csv.row().cell("strike").cell(grid.dt()).cell(k);
        add_estimate_row(csv, p);
    }
    json ladder = json::array();
    for (const auto& [g, e] : coupled_ladder(cfg, ens)) {
        const EstimateWithCI p = barrier_option_price(cfg.model, spec, g, e);
        ladder.push_back(estimator_record("barrier_option_price", p, record_context(cfg.model, ens.seed, g)));
        csv.row().cell("dt").cell(g.dt()).cell(spec.strike);
        add_estimate_row(csv, p);
    }
    out.result["strike_ladder"] = std::move(strikes);
    out.result["dt_ladder"] = std::move(ladder);
    if (cfg.output.wants("csv")) out.curve = std::move(csv);
}

void throw_if_invalid(const ExperimentConfig& cfg) {
    const auto issues = validate_config(cfg);
    if (!issues.empty()) throw ConfigError(issues.front().field, issues.front().message);
}

}  // namespace

const char* version() { return AJSIM_VERSION; }

TaskOutput run_task(const ExperimentConfig& cfg, unsigned threads, std::ostream& log) {
    throw_if_invalid(cfg);
    const Ensemble ens = make_ensemble(cfg, threads);
    const SimGrid grid = SimGrid::from_dt(cfg.grid.horizon, cfg.grid.dt);

    TaskOutput out;
    out.result = regime_block(cfg);
    out.result["task"] = to_string(cfg.task);
    out.result["params_hash"] = params_hash(cfg.model);
    out.result["seed"] = cfg.ensemble.seed;
    out.result["model"] = to_json(cfg.model);

    log << "ajsim " << to_string(cfg.task) << ": " << cfg.ensemble.n_paths << " paths, seed " << cfg.ensemble.seed
        << '\n';
    switch (cfg.task) {
        case Task::simulate: run_simulate(cfg, grid, ens, out); break;
        case Task::moments: run_moments(cfg, grid, ens, out); break;
        case Task::occupancy: run_occupancy(cfg, grid, ens, out); break;
        case Task::asymptotics: run_asymptotics(cfg, ens, out); break;
        case Task::lemma22: run_poisson_integrals(cfg, ens, out); break;
        case Task::converge: run_converge(cfg, ens, out, log); break;
        case Task::bond: run_bond(cfg, grid, ens, out); break;
        case Task::barrier: run_barrier(cfg, grid, ens, out); break;
    }
    return out;
}

int run(ExperimentConfig cfg, const RunOptions& options, std::ostream& log) {
    if (options.out_dir) cfg.output.dir = options.out_dir->string();
    if (options.seed) cfg.ensemble.seed = *options.seed;

    const auto issues = validate_config(cfg);
    if (!issues.empty()) {
        for (const auto& issue : issues) log << "config error: " << issue.field << ": " << issue.message << '\n';
        return kExitInvalidConfig;
    }

    const unsigned threads = resolve_threads(options.threads);
    const std::filesystem::path dir = cfg.output.dir;
    const std::string started = utc_now();

    int status = kExitOk;
    std::string status_text = "ok";
    std::string message;
    std::vector<std::string> outputs;
    try {
        TaskOutput out = run_task(cfg, threads, log);
        std::filesystem::create_directories(dir);
        write_text_file(dir / "result.json", out.result.dump(2) + "\n");
        outputs.push_back("result.json");
        if (out.curve) {
            out.curve->write(dir / "curve.csv");
            outputs.push_back("curve.csv");
        }
        if (out.archive) {
            write_archive(dir / "paths.bin", *out.archive);
            outputs.push_back("paths.bin");
        }
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const RuntimeAbort& e) {
        status = kExitRuntimeAbort;
        status_text = "runtime_abort";
        message = e.what();
        log << "runtime abort: " << e.what() << '\n';
    } catch (const std::exception& e) {
        status = kExitError;
        status_text = "error";
        message = e.what();
        log << "error: " << e.what() << '\n';
    }

    try {
        std::filesystem::create_directories(dir);
        json manifest = {
            {"version", version()},
            {"task", to_string(cfg.task)},
            {"seed", cfg.ensemble.seed},
            {"threads", threads},
            {"params_hash", params_hash(cfg.model)},
            {"started_utc", started},
            {"finished_utc", utc_now()},
            {"status", status_text},
            {"exit_code", status},
            {"outputs", outputs},
            {"config", to_json(cfg)},
            {"config_toml", emit_config(cfg)},
        };
        if (!message.empty()) manifest["message"] = message;
        write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitError;
    }
    return status;
}

json validate_report(const ExperimentConfig& cfg) {
    const auto issues = validate_config(cfg);
    json errors = json::array();
    for (const auto& i : issues) errors.push_back({{"field", i.field}, {"message", i.message}});
    json report = {{"valid", issues.empty()}, {"errors", std::move(errors)}, {"task", to_string(cfg.task)}};

    const bool model_ok = validate(cfg.model).empty();
    if (model_ok) {
        const json regime = regime_block(cfg);
        report["regime"] = regime["regime"];
        report["warnings"] = regime["warnings"];
        report["all_green"] = issues.empty() && regime["regime"]["moment_ok"].get<bool>() &&
                              regime["regime"]["second_moment_corollary_ok"].get<bool>();
        if (cfg.params.theta > 0.0 && cfg.params.theta < 1.0) {
            const GeneratorScan scan = generator_supremum(cfg.model, cfg.params.theta);
            report["generator_scan"] = {
                {"theta", cfg.params.theta},
                {"supremum", scan.supremum},
                {"argmax", scan.argmax},
                {"finite", scan.finite},
            };
        }
    } else {
        report["all_green"] = false;
    }
    return report;
}

}  // namespace ajsim
