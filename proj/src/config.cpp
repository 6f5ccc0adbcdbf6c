#include "ftl/config.hpp"

#include "ftl/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace ftl {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 12> kCommands{{
    {Command::simulate, "simulate"},
    {Command::generator_check, "generator-check"},
    {Command::adjoint_check, "adjoint-check"},
    {Command::stationary_test, "stationary-test"},
    {Command::couple, "couple"},
    {Command::tmix_upper, "tmix-upper"},
    {Command::tmix_lower, "tmix-lower"},
    {Command::frozen_beta, "frozen-beta"},
    {Command::dominance_check, "dominance-check"},
    {Command::heavy_tail, "heavy-tail"},
    {Command::fclt, "fclt"},
    {Command::hitting_time, "hitting-time"},
}};

const std::set<std::string> kKeys{
    "command", "n",      "law",       "t_end",  "t_grid",  "replicas",     "seed",
    "workers", "out_dir", "delta",    "m_list", "x_grid",  "k_fraction",   "init",
    "spread_scale", "start", "t_cap", "burn_in", "h",      "states",       "points",
    "trajectory_log"};

const std::set<std::string> kLawKeys{"kind", "alpha", "value", "values", "weights"};

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError(path, what);
}

double get_real(const json& j, const std::string& path)
{
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& path)
{
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) fail(path, "expected a nonnegative integer");
    fail(path, "expected an integer");
}

std::string get_string(const json& j, const std::string& path)
{
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> get_reals(const json& j, const std::string& path)
{
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(get_real(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

LawSpec parse_law(const json& j)
{
    LawSpec law;
    if (j.is_string()) {
        law.kind = j.get<std::string>();
    } else if (j.is_object()) {
        for (const auto& [key, value] : j.items())
            if (!kLawKeys.contains(key)) fail("law." + key, "unknown key");
        if (!j.contains("kind")) fail("law.kind", "missing");
        law.kind = get_string(j["kind"], "law.kind");
        if (j.contains("alpha")) law.alpha = get_real(j["alpha"], "law.alpha");
        if (j.contains("value")) law.value = get_real(j["value"], "law.value");
        if (j.contains("values")) law.values = get_reals(j["values"], "law.values");
        if (j.contains("weights")) law.weights = get_reals(j["weights"], "law.weights");
        const auto used = [&](const char* key, bool wanted) {
            if (j.contains(key) && !wanted)
                fail(std::string("law.") + key, "not a parameter of law '" + law.kind + "'");
        };
        used("alpha", law.kind == "pareto");
        used("value", law.kind == "constant");
        used("values", law.kind == "table");
        used("weights", law.kind == "table");
    } else {
        fail("law", "expected a string or an object");
    }
    return law;
}

} // namespace

std::string_view command_name(Command c)
{
    for (const auto& [cmd, name] : kCommands)
        if (cmd == c) return name;
    return "?";
}

std::optional<Command> parse_command(std::string_view name)
{
    for (const auto& [cmd, n] : kCommands)
        if (n == name) return cmd;
    return std::nullopt;
}

const std::vector<Command>& all_commands()
{
    static const std::vector<Command> all = [] {
        std::vector<Command> v;
        for (const auto& entry : kCommands) v.push_back(entry.first);
        return v;
    }();
    return all;
}

JumpLaw LawSpec::build() const
{
    if (kind == "exp_unit") return JumpLaw::exp_unit();
    if (kind == "pareto") return JumpLaw::pareto_unit_mean(alpha);
    if (kind == "constant") return JumpLaw::constant(value);
    if (kind == "table") return JumpLaw::table(values, weights);
    throw ConfigError("law.kind", "unknown law '" + kind + "'");
}

std::vector<double> ExperimentConfig::grid() const
{
    return t_grid.empty() ? std::vector<double>{t_end} : t_grid;
}

void validate_config(const ExperimentConfig& c)
{
    if (c.n < 2) fail("n", "must be >= 2");
    try {
        (void)c.law.build();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        const std::string field = c.law.kind == "pareto"     ? "law.alpha"
                                  : c.law.kind == "constant" ? "law.value"
                                                             : "law";
        fail(field, e.what());
    }
    if (!(c.t_end >= 0.0)) fail("t_end", "must be >= 0");
    for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
        const std::string path = "t_grid[" + std::to_string(i) + "]";
        if (!(c.t_grid[i] >= 0.0)) fail(path, "must be >= 0");
        if (i > 0 && !(c.t_grid[i] > c.t_grid[i - 1])) fail(path, "grid must be increasing");
    }
    if (c.replicas < 1) fail("replicas", "must be >= 1");
    if (c.out_dir.empty()) fail("out_dir", "must not be empty");
    if (!(c.delta >= 0.0 && c.delta < 1.0)) fail("delta", "must lie in [0, 1)");
    for (std::size_t i = 0; i < c.m_list.size(); ++i)
        if (c.m_list[i] < 3) fail("m_list[" + std::to_string(i) + "]", "must be >= 3");
    for (std::size_t i = 0; i < c.x_grid.size(); ++i) {
        const double x = c.x_grid[i];
        const std::string path = "x_grid[" + std::to_string(i) + "]";
        if (!(x > 0.0 && x <= 1.0)) fail(path, "must lie in (0, 1]");
        if (std::floor(static_cast<double>(c.n) * x) < 1.0) fail(path, "floor(n x) must be >= 1");
    }
    if (!(c.k_fraction > 0.0 && c.k_fraction < 1.0)) fail("k_fraction", "must lie in (0, 1)");
    if (c.init != "zeros" && c.init != "spread" && c.init != "stationary" && c.init != "custom")
        fail("init", "expected zeros, spread, stationary or custom");
    if (!(c.spread_scale >= 0.0)) fail("spread_scale", "must be >= 0");
    if (c.init == "custom" && c.start.size() != c.n - 1) fail("start", "needs n - 1 gaps");
    for (std::size_t i = 0; i < c.start.size(); ++i)
        if (!(c.start[i] >= 0.0)) fail("start[" + std::to_string(i) + "]", "must be >= 0");
    if (!(c.t_cap > 0.0)) fail("t_cap", "must be > 0");
    if (c.burn_in && !(*c.burn_in >= 0.0)) fail("burn_in", "must be >= 0");
    if (!(c.h > 0.0)) fail("h", "must be > 0");
    if (c.states < 1) fail("states", "must be >= 1");
    if (c.points < 1) fail("points", "must be >= 1");
    if (c.trajectory_log != "none" && c.trajectory_log != "csv" && c.trajectory_log != "binary")
        fail("trajectory_log", "expected none, csv or binary");
}

ExperimentConfig parse_config(std::string_view text, std::optional<Command> fallback)
{
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail("", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail("", "expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kKeys.contains(key)) fail(key, "unknown key");

    ExperimentConfig c;
    if (j.contains("command")) {
        const auto name = get_string(j["command"], "command");
        const auto cmd = parse_command(name);
        if (!cmd) fail("command", "unknown command '" + name + "'");
        c.command = *cmd;
    } else if (fallback) {
        c.command = *fallback;
    }
    if (j.contains("n")) c.n = get_unsigned(j["n"], "n");
    if (j.contains("law")) c.law = parse_law(j["law"]);
    if (j.contains("t_end")) c.t_end = get_real(j["t_end"], "t_end");
    if (j.contains("t_grid")) c.t_grid = get_reals(j["t_grid"], "t_grid");
    if (j.contains("replicas")) c.replicas = get_unsigned(j["replicas"], "replicas");
    if (j.contains("seed")) c.seed = get_unsigned(j["seed"], "seed");
    if (j.contains("workers")) {
        const auto& w = j["workers"];
        if (w.is_string()) {
            if (w.get<std::string>() != "auto") fail("workers", "expected an integer or \"auto\"");
            c.workers = 0;
        } else {
            const auto v = get_unsigned(w, "workers");
            if (v < 1 || v > 4096) fail("workers", "must lie in [1, 4096] or be \"auto\"");
            c.workers = static_cast<unsigned>(v);
        }
    }
    if (j.contains("out_dir")) c.out_dir = get_string(j["out_dir"], "out_dir");
    if (j.contains("delta")) c.delta = get_real(j["delta"], "delta");
    if (j.contains("m_list")) {
        const auto& a = j["m_list"];
        if (!a.is_array()) fail("m_list", "expected an array of integers");
        for (std::size_t i = 0; i < a.size(); ++i)
            c.m_list.push_back(get_unsigned(a[i], "m_list[" + std::to_string(i) + "]"));
    }
    if (j.contains("x_grid")) c.x_grid = get_reals(j["x_grid"], "x_grid");
    if (j.contains("k_fraction")) c.k_fraction = get_real(j["k_fraction"], "k_fraction");
    if (j.contains("init")) c.init = get_string(j["init"], "init");
    if (j.contains("spread_scale")) c.spread_scale = get_real(j["spread_scale"], "spread_scale");
    if (j.contains("start")) c.start = get_reals(j["start"], "start");
    if (j.contains("t_cap")) c.t_cap = get_real(j["t_cap"], "t_cap");
    if (j.contains("burn_in") && !j["burn_in"].is_null())
        c.burn_in = get_real(j["burn_in"], "burn_in");
    if (j.contains("h")) c.h = get_real(j["h"], "h");
    if (j.contains("states")) c.states = get_unsigned(j["states"], "states");
    if (j.contains("points")) c.points = get_unsigned(j["points"], "points");
    if (j.contains("trajectory_log"))
        c.trajectory_log = get_string(j["trajectory_log"], "trajectory_log");
    validate_config(c);
    if (!j.contains("command") && !fallback) fail("command", "missing");
    return c;
}

std::string serialize_config(const ExperimentConfig& c, int indent)
{
    json law{{"kind", c.law.kind}};
    if (c.law.kind == "pareto") law["alpha"] = c.law.alpha;
    if (c.law.kind == "constant") law["value"] = c.law.value;
    if (c.law.kind == "table") {
        law["values"] = c.law.values;
        law["weights"] = c.law.weights;
    }
    json j{
        {"command", std::string(command_name(c.command))},
        {"n", c.n},
        {"law", law},
        {"t_end", c.t_end},
        {"t_grid", c.t_grid},
        {"replicas", c.replicas},
        {"seed", c.seed},
        {"out_dir", c.out_dir},
        {"delta", c.delta},
        {"m_list", c.m_list},
        {"x_grid", c.x_grid},
        {"k_fraction", c.k_fraction},
        {"init", c.init},
        {"spread_scale", c.spread_scale},
        {"start", c.start},
        {"t_cap", c.t_cap},
        {"burn_in", c.burn_in ? json(*c.burn_in) : json(nullptr)},
        {"h", c.h},
        {"states", c.states},
        {"points", c.points},
        {"trajectory_log", c.trajectory_log},
    };
    if (c.workers == 0)
        j["workers"] = "auto";
    else
        j["workers"] = c.workers;
    return j.dump(indent);
}

} // namespace ftl
