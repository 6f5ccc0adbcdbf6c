#pragma once

// Experiment configuration: strict JSON parsing, validation and serialization.

#include "ftl/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ftl {

enum class Command {
    simulate,
    generator_check,
    adjoint_check,
    stationary_test,
    couple,
    tmix_upper,
    tmix_lower,
    frozen_beta,
    dominance_check,
    heavy_tail,
    fclt,
    hitting_time,
};

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view name);
const std::vector<Command>& all_commands();

/// Leader law as written in the configuration (kept verbatim so serialization round-trips).
struct LawSpec {
    std::string kind = "exp_unit"; // exp_unit | pareto | constant | table
    double alpha = 2.5;            // pareto tail index
    double value = 1.0;            // constant
    std::vector<double> values;    // table
    std::vector<double> weights;   // table

    JumpLaw build() const;
    friend bool operator==(const LawSpec&, const LawSpec&) = default;
};

struct ExperimentConfig {
    Command command = Command::simulate;
    std::size_t n = 4;
    LawSpec law;
    double t_end = 1.0;
    std::vector<double> t_grid; // empty: {t_end}
    std::size_t replicas = 1;
    std::uint64_t seed = 0;
    unsigned workers = 1; // 0: one per hardware thread ("auto")
    std::string out_dir = "out";

    double delta = 0.9;
    std::vector<std::size_t> m_list;
    std::vector<double> x_grid;
    double k_fraction = 0.01;
    std::string init = "zeros"; // zeros | spread | stationary | custom
    double spread_scale = 10.0;
    std::vector<double> start; // custom init
    double t_cap = 1000.0;
    std::optional<double> burn_in; // default 10 n
    double h = 1e-3;
    std::size_t states = 5;
    std::size_t points = 100;
    std::string trajectory_log = "none"; // none | csv | binary

    /// t_grid, or {t_end} when no grid was given.
    std::vector<double> grid() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates a JSON object. A missing "command" falls back to `fallback`.
/// Throws ConfigError naming the offending key path.
ExperimentConfig parse_config(std::string_view text, std::optional<Command> fallback = {});

/// Range checks shared by parsing and flag overrides.
void validate_config(const ExperimentConfig& c);

/// Full JSON echo including defaults; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c, int indent = 2);

} // namespace ftl
