#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "ajsim/config.hpp"

using namespace ajsim;

namespace {

constexpr const char* kBondConfig = R"(
[task]
name = "bond"

[model]
y0 = 0.05
rho = 1.5
gamma = 2

[grid]
horizon = 1.0
dt = 0.001

[ensemble]
n_paths = 16
seed = 7

[output]
dir = "out/bond"
formats = ["json"]
)";

bool has_field(const std::vector<ValidationIssue>& issues, const std::string& field) {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.field == field; });
}

std::string field_of(std::string_view text, std::vector<std::string> overrides = {}) {
    try {
        (void)parse_config(text, overrides);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("parse reads every section") {
    const auto cfg = parse_config(kBondConfig);
    CHECK(cfg.task == Task::bond);
    CHECK(cfg.model.y0 == 0.05);
    CHECK(cfg.model.gamma == 2.0);
    CHECK(cfg.model.sigma == 0.0);
    CHECK(cfg.grid.dt == 0.001);
    CHECK(cfg.ensemble.n_paths == 16);
    CHECK(cfg.ensemble.seed == 7);
    CHECK(cfg.output.dir == "out/bond");
    CHECK(cfg.output.wants("json"));
    CHECK_FALSE(cfg.output.wants("csv"));
    CHECK(validate_config(cfg).empty());

    const auto defaults = parse_config("");
    CHECK(defaults == ExperimentConfig{});
}

TEST_CASE("unknown keys and type mismatches name the field") {
    CHECK(field_of("[model]\nsigmma = 0.3\n") == "model.sigmma");
    CHECK(field_of("[modle]\n") == "modle");
    CHECK(field_of("[model]\nsigma = \"big\"\n") == "model.sigma");
    CHECK(field_of("[ensemble]\nn_paths = -3\n") == "ensemble.n_paths");
    CHECK(field_of("[ensemble]\nn_paths = 2.5\n") == "ensemble.n_paths");
    CHECK(field_of("[grid]\ndt_levels = [0.1, \"x\"]\n") == "grid.dt_levels[1]");
    CHECK(field_of("[task]\nname = \"price\"\n") == "task.name");
    CHECK(field_of("model = 3\n") == "model");
    CHECK(field_of("[model\n") == "<config>");
}

TEST_CASE("overrides") {
    const std::vector<std::string> sets{"model.sigma=0.25", "ensemble.seed = 99", "grid.dt_levels=[0.1, 0.05]",
                                        "output.dir=elsewhere", "task.name=\"barrier\""};
    const auto cfg = parse_config(kBondConfig, sets);
    CHECK(cfg.model.sigma == 0.25);
    CHECK(cfg.ensemble.seed == 99);
    CHECK(cfg.grid.dt_levels == std::vector<double>{0.1, 0.05});
    CHECK(cfg.output.dir == "elsewhere");
    CHECK(cfg.task == Task::barrier);
    // Integers are accepted where a real is expected.
    CHECK(parse_config("", std::vector<std::string>{"model.y0=2"}).model.y0 == 2.0);

    CHECK(field_of(kBondConfig, {"model.nope=1"}) == "model.nope");
    CHECK(field_of(kBondConfig, {"model.sigma"}) == "model.sigma");
    CHECK(field_of(kBondConfig, {"model.sigma=abc"}) == "model.sigma");
}

TEST_CASE("emit round-trips") {
    auto cfg = parse_config(kBondConfig);
    cfg.model.sigma = 0.1 + 0.2;
    cfg.model.a2 = 1.0 / 3.0;
    cfg.model.lambda = 1e-300;
    cfg.grid.dt_levels = {0.0625, 0.03125};
    cfg.ensemble.seed = 9223372036854775807ULL;
    cfg.params.strikes = {0.5, 0.75};
    cfg.params.integrands = {"identity"};
    cfg.params.n1_search = false;
    cfg.output.formats = {"json", "csv", "bin"};
    const auto text = emit_config(cfg);
    CAPTURE(text);
    CHECK(parse_config(text) == cfg);
    CHECK(emit_config(parse_config(text)) == text);
    CHECK(parse_config(emit_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("validation reports each invariant by field") {
    ExperimentConfig cfg;
    cfg.model.gamma = 0.9;
    cfg.model.y0 = 0.0;
    cfg.grid.horizon = 1.0;
    cfg.grid.dt = 0.3;
    cfg.grid.dt_levels = {0.1, 0.2, 1.5};
    cfg.ensemble.n_paths = 0;
    cfg.ensemble.refine = 0;
    cfg.params.p = 0.0;
    cfg.params.n1 = 1.0;
    cfg.params.epsilon = 1.0;
    cfg.params.xi = 0.0;
    cfg.params.strike = -1.0;
    cfg.params.barrier = 0.0;
    cfg.params.theta = 1.0;
    cfg.params.integrands = {"square"};
    cfg.params.integral_horizons = {0.0};
    cfg.output.formats = {"xml"};
    cfg.output.dir.clear();
    const auto issues = validate_config(cfg);
    for (const char* f : {"model.gamma", "model.y0", "grid.dt", "grid.dt_levels[1]", "grid.dt_levels[2]",
                          "ensemble.n_paths", "ensemble.refine", "task.p", "task.n1", "task.epsilon", "task.xi",
                          "task.strike", "task.barrier", "task.theta", "task.integrands[0]", "task.integral_horizons[0]",
                          "output.formats[0]", "output.dir"}) {
        CAPTURE(f);
        CHECK(has_field(issues, f));
    }
    CHECK_FALSE(has_field(issues, "grid.dt_levels[0]"));

    ExperimentConfig conv;
    conv.task = Task::converge;
    CHECK(has_field(validate_config(conv), "grid.dt_levels"));
    conv.grid.dt_levels = {0.0625, 0.03125};
    CHECK(validate_config(conv).empty());
}

TEST_CASE("task names") {
    for (Task t : {Task::simulate, Task::moments, Task::occupancy, Task::asymptotics, Task::lemma22, Task::converge,
                   Task::bond, Task::barrier}) {
        CHECK(parse_task(to_string(t)) == t);
    }
    CHECK_FALSE(parse_task("validate"));
}
