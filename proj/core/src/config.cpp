#include "ajsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include <toml.hpp>

#include "ajsim/noise.hpp"

namespace ajsim {

namespace {

constexpr std::pair<Task, std::string_view> kTaskNames[] = {
    {Task::simulate, "simulate"}, {Task::moments, "moments"},   {Task::occupancy, "occupancy"},
    {Task::asymptotics, "asymptotics"}, {Task::lemma22, "lemma22"}, {Task::converge, "converge"},
    {Task::bond, "bond"},         {Task::barrier, "barrier"},
};

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void check_keys(const toml::table& tbl, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, node] : tbl) {
        if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
            throw ConfigError(join(path, key.str()), "unknown key");
        }
    }
}

const toml::table* section(const toml::table& root, std::string_view name) {
    const toml::node* node = root.get(name);
    if (node == nullptr) return nullptr;
    if (!node->is_table()) throw ConfigError(std::string(name), "expected a table");
    return node->as_table();
}

void read(const toml::table& tbl, const std::string& path, std::string_view key, double& out) {
    const toml::node* node = tbl.get(key);
    if (node == nullptr) return;
    if (auto v = node->as_floating_point()) {
        out = v->get();
    } else if (auto i = node->as_integer()) {
        out = static_cast<double>(i->get());
    } else {
        throw ConfigError(join(path, key), "expected a number");
    }
}

void read(const toml::table& tbl, const std::string& path, std::string_view key, std::uint64_t& out) {
    const toml::node* node = tbl.get(key);
    if (node == nullptr) return;
    const auto* i = node->as_integer();
    if (i == nullptr) throw ConfigError(join(path, key), "expected an integer");
    if (i->get() < 0) throw ConfigError(join(path, key), "must be >= 0");
    out = static_cast<std::uint64_t>(i->get());
}

void read(const toml::table& tbl, const std::string& path, std::string_view key, bool& out) {
    const toml::node* node = tbl.get(key);
    if (node == nullptr) return;
    const auto* b = node->as_boolean();
    if (b == nullptr) throw ConfigError(join(path, key), "expected a boolean");
    out = b->get();
}

void read(const toml::table& tbl, const std::string& path, std::string_view key, std::string& out) {
    const toml::node* node = tbl.get(key);
    if (node == nullptr) return;
    const auto* s = node->as_string();
    if (s == nullptr) throw ConfigError(join(path, key), "expected a string");
    out = s->get();
}

void read(const toml::table& tbl, const std::string& path, std::string_view key, std::vector<double>& out) {
    const toml::node* node = tbl.get(key);
    if (node == nullptr) return;
    const auto* arr = node->as_array();
    if (arr == nullptr) throw ConfigError(join(path, key), "expected an array of numbers");
    std::vector<double> values;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const toml::node& el = *arr->get(i);
        const std::string where = join(path, key) + "[" + std::to_string(i) + "]";
        if (auto v = el.as_floating_point()) {
            values.push_back(v->get());
        } else if (auto n = el.as_integer()) {
            values.push_back(static_cast<double>(n->get()));
        } else {
            throw ConfigError(where, "expected a number");
        }
    }
    out = std::move(values);
}

void read(const toml::table& tbl, const std::string& path, std::string_view key, std::vector<std::string>& out) {
    const toml::node* node = tbl.get(key);
    if (node == nullptr) return;
    const auto* arr = node->as_array();
    if (arr == nullptr) throw ConfigError(join(path, key), "expected an array of strings");
    std::vector<std::string> values;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto* s = arr->get(i)->as_string();
        if (s == nullptr) throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]", "expected a string");
        values.push_back(s->get());
    }
    out = std::move(values);
}

void apply_override(toml::table& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);
    auto trim = [](std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);

    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ConfigError(key, "empty key segment in override");
        parts.push_back(part);
    }

    toml::table parsed;
    try {
        parsed = toml::parse("v = " + value);
    } catch (const toml::parse_error&) {
        parsed = toml::table{};
        parsed.insert("v", value);
    }

    toml::table* tbl = &root;
    std::string path;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        path = join(path, parts[i]);
        if (!tbl->contains(parts[i])) tbl->insert(parts[i], toml::table{});
        tbl = tbl->get(parts[i])->as_table();
        if (tbl == nullptr) throw ConfigError(path, "override descends into a non-table");
    }
    tbl->insert_or_assign(parts.back(), *parsed.get("v"));
}

ExperimentConfig from_table(const toml::table& root) {
    check_keys(root, "", {"task", "model", "grid", "ensemble", "output"});
    ExperimentConfig cfg;

    if (const auto* t = section(root, "task")) {
        check_keys(*t, "task", {"name", "p", "avg_exponents", "n1", "epsilon", "n1_search", "t_large", "band",
                                "spacing", "integral_lambdas", "integral_horizons", "integrands", "xi", "ref_factor",
                                "strike", "barrier", "strikes", "theta"});
        std::string name;
        read(*t, "task", "name", name);
        if (!name.empty()) {
            const auto task = parse_task(name);
            if (!task) throw ConfigError("task.name", "unknown task '" + name + "'");
            cfg.task = *task;
        }
        auto& p = cfg.params;
        read(*t, "task", "p", p.p);
        read(*t, "task", "avg_exponents", p.avg_exponents);
        read(*t, "task", "n1", p.n1);
        read(*t, "task", "epsilon", p.epsilon);
        read(*t, "task", "n1_search", p.n1_search);
        read(*t, "task", "t_large", p.t_large);
        read(*t, "task", "band", p.band);
        read(*t, "task", "spacing", p.spacing);
        read(*t, "task", "integral_lambdas", p.integral_lambdas);
        read(*t, "task", "integral_horizons", p.integral_horizons);
        read(*t, "task", "integrands", p.integrands);
        read(*t, "task", "xi", p.xi);
        read(*t, "task", "ref_factor", p.ref_factor);
        read(*t, "task", "strike", p.strike);
        read(*t, "task", "barrier", p.barrier);
        read(*t, "task", "strikes", p.strikes);
        read(*t, "task", "theta", p.theta);
    }
    if (const auto* m = section(root, "model")) {
        check_keys(*m, "model", {"a_neg1", "a0", "a1", "a2", "gamma", "sigma", "rho", "delta", "lambda", "y0"});
        auto& mp = cfg.model;
        read(*m, "model", "a_neg1", mp.a_neg1);
        read(*m, "model", "a0", mp.a0);
        read(*m, "model", "a1", mp.a1);
        read(*m, "model", "a2", mp.a2);
        read(*m, "model", "gamma", mp.gamma);
        read(*m, "model", "sigma", mp.sigma);
        read(*m, "model", "rho", mp.rho);
        read(*m, "model", "delta", mp.delta);
        read(*m, "model", "lambda", mp.lambda);
        read(*m, "model", "y0", mp.y0);
    }
    if (const auto* g = section(root, "grid")) {
        check_keys(*g, "grid", {"horizon", "dt", "dt_levels"});
        read(*g, "grid", "horizon", cfg.grid.horizon);
        read(*g, "grid", "dt", cfg.grid.dt);
        read(*g, "grid", "dt_levels", cfg.grid.dt_levels);
    }
    if (const auto* e = section(root, "ensemble")) {
        check_keys(*e, "ensemble", {"n_paths", "seed", "refine"});
        read(*e, "ensemble", "n_paths", cfg.ensemble.n_paths);
        read(*e, "ensemble", "seed", cfg.ensemble.seed);
        read(*e, "ensemble", "refine", cfg.ensemble.refine);
    }
    if (const auto* o = section(root, "output")) {
        check_keys(*o, "output", {"dir", "formats"});
        read(*o, "output", "dir", cfg.output.dir);
        read(*o, "output", "formats", cfg.output.formats);
    }
    return cfg;
}

template <class T>
toml::array to_array(const std::vector<T>& values) {
    toml::array arr;
    for (const auto& v : values) arr.push_back(v);
    return arr;
}

bool divides(double horizon, double dt) {
    try {
        (void)SimGrid::from_dt(horizon, dt);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

}  // namespace

const char* to_string(Task task) {
    for (const auto& [t, name] : kTaskNames) {
        if (t == task) return name.data();
    }
    return "unknown";
}

std::optional<Task> parse_task(std::string_view name) {
    for (const auto& [t, n] : kTaskNames) {
        if (n == name) return t;
    }
    return std::nullopt;
}

bool OutputConfig::wants(std::string_view format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ExperimentConfig parse_config(std::string_view toml_text, std::span<const std::string> overrides) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& err) {
        std::ostringstream msg;
        msg << err.description() << " (line " << err.source().begin.line << ")";
        throw ConfigError("<config>", msg.str());
    }
    for (const auto& o : overrides) apply_override(root, o);
    return from_table(root);
}

ExperimentConfig load_config(const std::filesystem::path& file, std::span<const std::string> overrides) {
    std::ifstream in(file);
    if (!in) throw ConfigError("<config>", "cannot read " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), overrides);
}

std::string emit_config(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    toml::table task{
        {"name", to_string(cfg.task)},
        {"p", p.p},
        {"avg_exponents", to_array(p.avg_exponents)},
        {"n1", p.n1},
        {"epsilon", p.epsilon},
        {"n1_search", p.n1_search},
        {"t_large", p.t_large},
        {"band", p.band},
        {"spacing", p.spacing},
        {"integral_lambdas", to_array(p.integral_lambdas)},
        {"integral_horizons", to_array(p.integral_horizons)},
        {"integrands", to_array(p.integrands)},
        {"xi", p.xi},
        {"ref_factor", static_cast<std::int64_t>(p.ref_factor)},
        {"strike", p.strike},
        {"barrier", p.barrier},
        {"strikes", to_array(p.strikes)},
        {"theta", p.theta},
    };
    const auto& m = cfg.model;
    toml::table model{
        {"a_neg1", m.a_neg1}, {"a0", m.a0},       {"a1", m.a1},         {"a2", m.a2},         {"gamma", m.gamma},
        {"sigma", m.sigma},   {"rho", m.rho},     {"delta", m.delta},   {"lambda", m.lambda}, {"y0", m.y0},
    };
    toml::table grid{
        {"horizon", cfg.grid.horizon},
        {"dt", cfg.grid.dt},
        {"dt_levels", to_array(cfg.grid.dt_levels)},
    };
    toml::table ensemble{
        {"n_paths", static_cast<std::int64_t>(cfg.ensemble.n_paths)},
        {"seed", static_cast<std::int64_t>(cfg.ensemble.seed)},
        {"refine", static_cast<std::int64_t>(cfg.ensemble.refine)},
    };
    toml::table output{
        {"dir", cfg.output.dir},
        {"formats", to_array(cfg.output.formats)},
    };
    toml::table root{
        {"task", std::move(task)},   {"model", std::move(model)},   {"grid", std::move(grid)},
        {"ensemble", std::move(ensemble)}, {"output", std::move(output)},
    };
    std::ostringstream out;
    out << root << '\n';
    return out.str();
}

std::vector<ValidationIssue> validate_config(const ExperimentConfig& cfg) {
    std::vector<ValidationIssue> issues = validate(cfg.model, "model");
    auto add = [&](std::string field, std::string message) { issues.push_back({std::move(field), std::move(message)}); };
    auto finite = [](double v) { return std::isfinite(v); };

    const auto& g = cfg.grid;
    const bool horizon_ok = finite(g.horizon) && g.horizon > 0.0;
    if (!horizon_ok) add("grid.horizon", "horizon must be > 0");
    if (!(finite(g.dt) && g.dt > 0.0 && g.dt < 1.0)) {
        add("grid.dt", "step must lie in (0, 1)");
    } else if (horizon_ok && !divides(g.horizon, g.dt)) {
        add("grid.dt", "step must divide the horizon into a whole number of steps");
    }
    for (std::size_t i = 0; i < g.dt_levels.size(); ++i) {
        const std::string f = "grid.dt_levels[" + std::to_string(i) + "]";
        const double dt = g.dt_levels[i];
        if (!(finite(dt) && dt > 0.0 && dt < 1.0)) {
            add(f, "step must lie in (0, 1)");
        } else if (horizon_ok && !divides(g.horizon, dt)) {
            add(f, "step must divide the horizon into a whole number of steps");
        }
        if (i > 0 && !(dt < g.dt_levels[i - 1])) add(f, "dt_levels must be strictly descending");
    }
    if (cfg.task == Task::converge && g.dt_levels.empty()) add("grid.dt_levels", "convergence study needs dt_levels");

    const auto& e = cfg.ensemble;
    if (e.n_paths == 0) add("ensemble.n_paths", "n_paths must be >= 1");
    if (e.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        add("ensemble.seed", "seed must fit in a signed 64-bit integer");
    }
    if (e.refine == 0) add("ensemble.refine", "refine must be >= 1");

    const auto& p = cfg.params;
    if (!finite(p.p) || p.p == 0.0) add("task.p", "moment order must be finite and nonzero");
    if (p.avg_exponents.empty()) add("task.avg_exponents", "need at least one exponent");
    for (std::size_t i = 0; i < p.avg_exponents.size(); ++i) {
        if (!finite(p.avg_exponents[i])) add("task.avg_exponents[" + std::to_string(i) + "]", "exponent must be finite");
    }
    if (!(finite(p.n1) && p.n1 > 1.0)) add("task.n1", "n1 must be > 1");
    if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) add("task.epsilon", "epsilon must lie in (0, 1)");
    if (!(finite(p.spacing) && p.spacing > 1.0)) add("task.spacing", "sample spacing must be > 1");
    if (!(finite(p.t_large) && p.t_large >= p.spacing)) add("task.t_large", "t_large must be >= spacing");
    if (!(finite(p.band) && p.band >= 0.0)) add("task.band", "band must be >= 0");
    if (cfg.task == Task::asymptotics && finite(p.t_large) && p.t_large > 0.0 && finite(g.dt) && g.dt > 0.0 &&
        !divides(p.t_large, g.dt)) {
        add("task.t_large", "grid.dt must divide t_large");
    }
    for (std::size_t i = 0; i < p.integral_lambdas.size(); ++i) {
        if (!(finite(p.integral_lambdas[i]) && p.integral_lambdas[i] >= 0.0)) {
            add("task.integral_lambdas[" + std::to_string(i) + "]", "intensity must be >= 0");
        }
    }
    for (std::size_t i = 0; i < p.integral_horizons.size(); ++i) {
        if (!(finite(p.integral_horizons[i]) && p.integral_horizons[i] > 0.0)) {
            add("task.integral_horizons[" + std::to_string(i) + "]", "horizon must be > 0");
        }
    }
    for (std::size_t i = 0; i < p.integrands.size(); ++i) {
        if (p.integrands[i] != "constant" && p.integrands[i] != "identity") {
            add("task.integrands[" + std::to_string(i) + "]", "integrand must be 'constant' or 'identity'");
        }
    }
    if (cfg.task == Task::lemma22 && e.n_paths < 2) add("ensemble.n_paths", "lemma22 needs at least two samples");
    if (!(p.xi > 0.0 && p.xi < 1.0)) add("task.xi", "threshold xi must lie in (0, 1)");
    if (p.ref_factor == 0) add("task.ref_factor", "reference refinement must be >= 1");
    if (!(finite(p.strike) && p.strike > 0.0)) add("task.strike", "strike must be > 0");
    if (!(p.barrier > 0.0)) add("task.barrier", "barrier must be > 0");
    for (std::size_t i = 0; i < p.strikes.size(); ++i) {
        if (!(finite(p.strikes[i]) && p.strikes[i] > 0.0)) add("task.strikes[" + std::to_string(i) + "]", "strike must be > 0");
    }
    if (!(p.theta > 0.0 && p.theta < 1.0)) add("task.theta", "theta must lie in (0, 1)");

    for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) {
        const auto& f = cfg.output.formats[i];
        if (f != "json" && f != "csv" && f != "bin") {
            add("output.formats[" + std::to_string(i) + "]", "format must be one of json, csv, bin");
        }
    }
    if (cfg.output.dir.empty()) add("output.dir", "output directory must be non-empty");
    return issues;
}

}  // namespace ajsim
