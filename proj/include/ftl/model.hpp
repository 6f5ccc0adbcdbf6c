#pragma once

// Domain types and closed-form evaluations for the follow-the-leader gap process.
//
// Gap labels in observables and events are 1-based (gap i sits between particle
// i and particle i+1); containers are 0-based.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ftl {

struct SystemState {
    double leader_pos = 0.0;
    std::vector<double> gaps; // Y_1..Y_{n-1}
    double clock = 0.0;

    SystemState() = default;
    explicit SystemState(std::vector<double> y, double leader = 0.0, double t = 0.0);

    std::size_t n() const noexcept { return gaps.size() + 1; }

    /// Position of particle `label` (1-based): leader_pos minus the gaps ahead of it.
    double position(std::size_t label) const;
    std::vector<double> positions() const;
};

/// Gaps Y_i = X_i - X_{i+1} of a descending position vector.
std::vector<double> gaps_from_positions(std::span<const double> positions);

/// Validates the state invariants: n >= 2, every gap finite and >= 0.
void validate_state(const SystemState& s);

// ---------------------------------------------------------------------------
// Jump-size law of the leader.

enum class LawKind { exp_unit, pareto_unit_mean, constant, table };

class JumpLaw {
public:
    static JumpLaw exp_unit();
    /// Pareto with tail index alpha > 1 and scale (alpha - 1) / alpha, so the mean is 1.
    static JumpLaw pareto_unit_mean(double alpha);
    /// Point mass at c > 0.
    static JumpLaw constant(double c = 1.0);
    /// Discrete law; values are rescaled so the weighted mean is 1.
    static JumpLaw table(std::vector<double> values, std::vector<double> weights);

    LawKind kind() const noexcept { return kind_; }
    double tail_index() const noexcept { return param_; }
    double pareto_scale() const noexcept { return scale_; }
    double constant_value() const noexcept { return param_; }
    const std::vector<double>& table_values() const noexcept { return values_; }
    const std::vector<double>& table_weights() const noexcept { return weights_; }

    /// Inverse-CDF transform of u in [0, 1).
    double sample(double u) const;
    double mean() const;
    /// Analytic j-th raw moment; throws UnsupportedError when infinite.
    double moment(int j) const;
    bool has_moment(int j) const noexcept;

    std::string describe() const;

    friend bool operator==(const JumpLaw&, const JumpLaw&) = default;

private:
    JumpLaw() = default;

    LawKind kind_ = LawKind::exp_unit;
    double param_ = 0.0;
    double scale_ = 1.0;
    std::vector<double> values_;
    std::vector<double> weights_; // normalized to sum 1
    std::vector<double> cumulative_;
};

double sample_jump_size(const JumpLaw& law, double uniform);

// ---------------------------------------------------------------------------
// Observables with exact generator images.

namespace obs {
struct Coordinate {
    std::size_t gap; // q_i(y) = y_i
};
struct GapSum {}; // phi(y) = sum_i y_i
struct Lyapunov {
    double alpha; // V(y) = 1 + sum_i alpha^i y_i
};
struct Power {
    std::size_t gap;
    int k; // psi_i(y) = y_i^k
};
} // namespace obs

using Observable = std::variant<obs::Coordinate, obs::GapSum, obs::Lyapunov, obs::Power>;

void validate_observable(const Observable& f, std::size_t gap_count);
std::string describe(const Observable& f);
double evaluate(const Observable& f, std::span<const double> gaps);

/// 1 + sum of gaps: the total event rate of the particle system.
double total_rate(const SystemState& s);
double total_rate(std::span<const double> gaps);

/// Exact value of the generator applied to `f` at `gaps`.
double generator_apply(std::span<const double> gaps, const Observable& f, const JumpLaw& law);

/// alpha * mu_1 - ((1 - alpha)/2) * sum_i alpha^i y_i^2, the quadratic drift bound for V.
/// generator_apply on a Lyapunov observable never exceeds this value, bit for bit.
double lyapunov_drift_bound(std::span<const double> gaps, double alpha, const JumpLaw& law);

/// The Lyapunov level set {V <= 4} with alpha = 1/10.
inline constexpr double kLyapunovAlpha = 0.1;
inline constexpr double kLyapunovLevel = 4.0;

// ---------------------------------------------------------------------------
// Densities and the adjoint operator.

namespace density {
struct ProductExpUnit {};
struct ProductExpRate {
    double rate;
};
struct Custom {
    std::function<double(std::span<const double>)> fn;
};
} // namespace density

using DensityKind = std::variant<density::ProductExpUnit, density::ProductExpRate, density::Custom>;

double density_value(const DensityKind& d, std::span<const double> y);

struct ClosedForm {};
struct Quadrature {
    double tol = 1e-8;
};
using AdjointMode = std::variant<ClosedForm, Quadrature>;

/// Adjoint of the generator applied to a density, evaluated at y (all components > 0).
double adjoint_apply(std::span<const double> y, const DensityKind& d, const AdjointMode& mode);

/// Componentwise y / lambda: maps Exp(1) product samples to Exp(lambda) product samples.
std::vector<double> rescale_gaps(std::span<const double> y, double lambda);

} // namespace ftl
