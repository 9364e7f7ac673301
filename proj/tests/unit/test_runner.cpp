#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "ajsim/runner.hpp"

using namespace ajsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ModelParams mean_reverting() {
    ModelParams p;
    p.a_neg1 = 0.3;
    p.a0 = 0.5;
    p.a1 = 0.5;
    p.a2 = 0.6;
    p.gamma = 1.5;
    p.sigma = 0.3;
    p.rho = 1.2;
    p.delta = 0.05;
    p.lambda = 1.0;
    return p;
}

ExperimentConfig constant_rate(Task task) {
    ExperimentConfig cfg;
    cfg.task = task;
    cfg.model.y0 = 0.05;
    cfg.grid.horizon = 1.0;
    cfg.grid.dt = 0.001;
    cfg.ensemble.n_paths = 8;
    return cfg;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "ajsim_runner_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("simulate on a constant regime writes constant paths") {
    auto cfg = constant_rate(Task::simulate);
    cfg.grid.dt = 0.25;
    cfg.ensemble.n_paths = 3;
    std::ostringstream log;
    const auto out = run_task(cfg, 1, log);
    REQUIRE(out.curve);
    const auto rows = lines(out.curve->text());
    REQUIRE(rows.size() == 1 + 3 * 5);
    CHECK(rows[0] == "path_id,t,Y");
    CHECK(rows[1] == "0,0,0.05");
    CHECK(rows[5] == "0,1,0.05");
    CHECK(rows[15] == "2,1,0.05");
    CHECK(out.curve->text().find('\r') == std::string::npos);
    CHECK(out.result["terminal_mean"]["point"] == 0.05);
    CHECK(out.result["terminal_mean"]["std_error"] == 0.0);
    CHECK(out.result["task"] == "simulate");
    CHECK_FALSE(out.archive);

    cfg.output.formats = {"json", "bin"};
    const auto bin = run_task(cfg, 1, log);
    CHECK_FALSE(bin.curve);
    REQUIRE(bin.archive);
    CHECK(bin.archive->paths.size() == 3);
    CHECK(bin.archive->values[1] == std::vector<double>(5, 0.05));
}

TEST_CASE("bond on the constant-rate example") {
    std::ostringstream log;
    const auto out = run_task(constant_rate(Task::bond), 1, log);
    const auto& price = out.result["price"];
    CHECK(std::fabs(price["point"].get<double>() - std::exp(-0.05)) <= 1e-12);
    CHECK(price["point"].get<double>() == doctest::Approx(0.95122942).epsilon(1e-8));
    CHECK(price["std_error"] == 0.0);
    CHECK(price["estimator"] == "bond_price");
    CHECK(price["grid"]["steps"] == 1000);
    CHECK(price["params_hash"] == out.result["params_hash"]);
    CHECK(out.result["params_hash"].get<std::string>().size() == 16);
}

TEST_CASE("run writes manifest and results") {
    auto cfg = constant_rate(Task::bond);
    const auto dir = scratch("bond");
    RunOptions opt;
    opt.threads = 2;
    opt.out_dir = dir;
    opt.seed = 42;
    std::ostringstream log;
    REQUIRE(run(cfg, opt, log) == kExitOk);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["exit_code"] == 0);
    CHECK(manifest["seed"] == 42);
    CHECK(manifest["threads"] == 2);
    CHECK(manifest["version"] == version());
    CHECK(manifest["config"]["ensemble"]["seed"] == 42);
    CHECK(parse_config(manifest["config_toml"].get<std::string>()).ensemble.seed == 42);
    CHECK(manifest["outputs"] == json::array({"result.json", "curve.csv"}));
    const auto text = slurp(dir / "result.json");
    CHECK(text.back() == '\n');
    CHECK(json::parse(text)["seed"] == 42);
    const auto csv = lines(slurp(dir / "curve.csv"));
    CHECK(csv.at(0) == "ladder,dt,point,std_error,ci_low,ci_high");
}

TEST_CASE("invalid config exits with 2 before simulating") {
    auto cfg = constant_rate(Task::bond);
    cfg.model.gamma = 0.9;
    cfg.grid.dt = 0.3;
    const auto dir = scratch("invalid");
    RunOptions opt;
    opt.out_dir = dir;
    std::ostringstream log;
    CHECK(run(cfg, opt, log) == kExitInvalidConfig);
    CHECK(log.str().find("model.gamma") != std::string::npos);
    CHECK(log.str().find("grid.dt") != std::string::npos);
    CHECK_FALSE(fs::exists(dir));
    CHECK_THROWS_AS(run_task(cfg, 1, log), ConfigError);
}

TEST_CASE("overflow of every path exits with 3") {
    auto cfg = constant_rate(Task::bond);
    cfg.model.y0 = 1e300;
    cfg.model.a1 = 1e12;
    const auto dir = scratch("abort");
    RunOptions opt;
    opt.out_dir = dir;
    std::ostringstream log;
    CHECK(run(cfg, opt, log) == kExitRuntimeAbort);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["status"] == "runtime_abort");
    CHECK(manifest["exit_code"] == 3);
    CHECK_FALSE(fs::exists(dir / "result.json"));
}

TEST_CASE("results do not depend on the thread count") {
    ExperimentConfig cfg;
    cfg.task = Task::moments;
    cfg.model = mean_reverting();
    cfg.grid.horizon = 1.0;
    cfg.grid.dt = 0.01;
    cfg.ensemble.n_paths = 300;
    std::ostringstream log;
    const auto one = run_task(cfg, 1, log);
    const auto four = run_task(cfg, 4, log);
    CHECK(one.result.dump(2) == four.result.dump(2));
    CHECK(one.curve->text() == four.curve->text());

    cfg.task = Task::barrier;
    cfg.params.strikes = {0.8, 1.0};
    cfg.grid.dt_levels = {0.01, 0.005};
    CHECK(run_task(cfg, 1, log).result.dump() == run_task(cfg, 3, log).result.dump());
}

TEST_CASE("converge logs one line per level") {
    ExperimentConfig cfg;
    cfg.task = Task::converge;
    cfg.model = mean_reverting();
    cfg.grid.dt_levels = {0.125, 0.0625, 0.03125};
    cfg.params.ref_factor = 8;
    cfg.ensemble.n_paths = 50;
    std::ostringstream log;
    const auto out = run_task(cfg, 1, log);
    const auto logged = lines(log.str());
    REQUIRE(logged.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(logged[i].rfind("converge: dt=", 0) == 0);
    CHECK(out.result["levels"].size() == 3);
    CHECK(out.result["dt_ref"].get<double>() == doctest::Approx(0.03125 / 8));
}

TEST_CASE("validate report") {
    ExperimentConfig cfg;
    cfg.model = mean_reverting();
    auto report = validate_report(cfg);
    CHECK(report["valid"] == true);
    CHECK(report["all_green"] == true);
    CHECK(report["errors"].empty());
    CHECK(report["generator_scan"]["finite"] == true);

    cfg.model.rho = 1.6;
    report = validate_report(cfg);
    CHECK(report["valid"] == true);
    CHECK(report["all_green"] == false);
    REQUIRE_FALSE(report["warnings"].empty());
    CHECK(report["warnings"][0].get<std::string>().rfind("moment bound", 0) == 0);

    cfg.model.gamma = 0.9;
    report = validate_report(cfg);
    CHECK(report["valid"] == false);
    CHECK(report["all_green"] == false);
    CHECK(report["errors"][0]["field"] == "model.gamma");
    CHECK(report["errors"][0]["message"].get<std::string>().find("gamma must be > 1") != std::string::npos);
}

#ifdef AJSIM_CLI_PATH
TEST_CASE("command line runs are byte-identical across thread counts") {
    const auto base = scratch("cli");
    const std::string cli = AJSIM_CLI_PATH;
    const std::string config = std::string(AJSIM_CONFIG_DIR) + "/moments.toml";
    auto invoke = [&](const std::string& args) { return std::system((cli + " " + args + " 2>/dev/null").c_str()); };
    const std::string small = " --set ensemble.n_paths=200 --set grid.horizon=1 --set grid.dt=0.01";
    REQUIRE(invoke("moments -c " + config + small + " --threads 1 --out " + (base / "t1").string()) == 0);
    REQUIRE(invoke("moments -c " + config + small + " --threads 4 --out " + (base / "t4").string()) == 0);
    CHECK(slurp(base / "t1" / "result.json") == slurp(base / "t4" / "result.json"));
    CHECK(slurp(base / "t1" / "curve.csv") == slurp(base / "t4" / "curve.csv"));

    CHECK(invoke("validate -c " + config + " > /dev/null") == 0);
    CHECK(WEXITSTATUS(invoke("validate -c " + config + " --set model.gamma=0.9 > /dev/null")) == kExitInvalidConfig);
    CHECK(WEXITSTATUS(invoke("moments -c " + config + " --set model.sigmma=1")) == kExitInvalidConfig);
    CHECK(WEXITSTATUS(invoke("bond -c " + std::string(AJSIM_CONFIG_DIR) + "/constant_bond.toml --set model.y0=1e300" +
                             " --set model.a1=1e12 --out " + (base / "abort").string())) == kExitRuntimeAbort);
}
#endif
