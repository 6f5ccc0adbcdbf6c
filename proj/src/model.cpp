#include "ftl/model.hpp"

#include "ftl/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ftl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double binomial(int k, int j)
{
    double c = 1.0;
    for (int r = 1; r <= j; ++r) c = c * (k - j + r) / r;
    return c;
}

void require_gap_label(std::size_t gap, std::size_t gap_count)
{
    if (gap < 1 || gap > gap_count)
        throw std::out_of_range("gap label " + std::to_string(gap) + " outside [1, " +
                                std::to_string(gap_count) + "]");
}

} // namespace

// ---------------------------------------------------------------------------

SystemState::SystemState(std::vector<double> y, double leader, double t)
    : leader_pos(leader), gaps(std::move(y)), clock(t)
{
}

double SystemState::position(std::size_t label) const
{
    if (label < 1 || label > n()) throw std::out_of_range("particle label out of range");
    double x = leader_pos;
    for (std::size_t j = 0; j + 1 < label; ++j) x -= gaps[j];
    return x;
}

std::vector<double> SystemState::positions() const
{
    std::vector<double> x(n());
    x[0] = leader_pos;
    for (std::size_t j = 0; j < gaps.size(); ++j) x[j + 1] = x[j] - gaps[j];
    return x;
}

std::vector<double> gaps_from_positions(std::span<const double> positions)
{
    if (positions.size() < 2) throw std::invalid_argument("need at least two particles");
    std::vector<double> y(positions.size() - 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = positions[i] - positions[i + 1];
        if (!(y[i] >= 0.0)) throw std::invalid_argument("positions must be nonincreasing");
    }
    return y;
}

void validate_state(const SystemState& s)
{
    if (s.gaps.empty()) throw std::invalid_argument("state needs n >= 2 particles");
    if (!std::isfinite(s.leader_pos) || !std::isfinite(s.clock) || s.clock < 0.0)
        throw std::invalid_argument("leader position and clock must be finite, clock >= 0");
    for (double g : s.gaps)
        if (!std::isfinite(g) || g < 0.0)
            throw std::invalid_argument("gaps must be finite and nonnegative");
}

// ---------------------------------------------------------------------------
// JumpLaw

JumpLaw JumpLaw::exp_unit()
{
    JumpLaw law;
    law.kind_ = LawKind::exp_unit;
    return law;
}

JumpLaw JumpLaw::pareto_unit_mean(double alpha)
{
    if (!(alpha > 1.0) || !std::isfinite(alpha))
        throw std::invalid_argument("Pareto tail index must exceed 1 (finite mean)");
    JumpLaw law;
    law.kind_ = LawKind::pareto_unit_mean;
    law.param_ = alpha;
    law.scale_ = (alpha - 1.0) / alpha;
    return law;
}

JumpLaw JumpLaw::constant(double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("constant jump size must be positive");
    JumpLaw law;
    law.kind_ = LawKind::constant;
    law.param_ = c;
    return law;
}

JumpLaw JumpLaw::table(std::vector<double> values, std::vector<double> weights)
{
    if (values.empty() || values.size() != weights.size())
        throw std::invalid_argument("table law needs matching, nonempty values and weights");
    double wsum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw std::invalid_argument("table values must be positive");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("table weights must be nonnegative");
        wsum += weights[i];
    }
    if (!(wsum > 0.0)) throw std::invalid_argument("table weights sum to zero");
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        weights[i] /= wsum;
        mean += weights[i] * values[i];
    }
    for (double& v : values) v /= mean;

    JumpLaw law;
    law.kind_ = LawKind::table;
    law.values_ = std::move(values);
    law.weights_ = std::move(weights);
    law.cumulative_.resize(law.weights_.size());
    std::partial_sum(law.weights_.begin(), law.weights_.end(), law.cumulative_.begin());
    return law;
}

double JumpLaw::sample(double u) const
{
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("uniform must lie in [0, 1)");
    switch (kind_) {
    case LawKind::exp_unit:
        return -std::log1p(-u);
    case LawKind::pareto_unit_mean:
        return scale_ * std::pow(1.0 - u, -1.0 / param_);
    case LawKind::constant:
        return param_;
    case LawKind::table: {
        const double target = u * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        auto idx = static_cast<std::size_t>(it - cumulative_.begin());
        idx = std::min(idx, values_.size() - 1);
        while (weights_[idx] == 0.0 && idx > 0) --idx;
        return values_[idx];
    }
    }
    return 0.0;
}

double sample_jump_size(const JumpLaw& law, double uniform) { return law.sample(uniform); }

double JumpLaw::mean() const { return moment(1); }

bool JumpLaw::has_moment(int j) const noexcept
{
    if (j < 0) return false;
    if (kind_ == LawKind::pareto_unit_mean) return j < param_;
    return true;
}

double JumpLaw::moment(int j) const
{
    if (j < 0) throw std::invalid_argument("moment order must be nonnegative");
    if (j == 0) return 1.0;
    switch (kind_) {
    case LawKind::exp_unit:
        return std::tgamma(j + 1.0);
    case LawKind::pareto_unit_mean:
        if (!(j < param_))
            throw UnsupportedError("Pareto law has no finite moment of order " + std::to_string(j));
        return param_ * std::pow(scale_, j) / (param_ - j);
    case LawKind::constant:
        return std::pow(param_, j);
    case LawKind::table: {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) m += weights_[i] * std::pow(values_[i], j);
        return m;
    }
    }
    return 0.0;
}

std::string JumpLaw::describe() const
{
    std::ostringstream os;
    switch (kind_) {
    case LawKind::exp_unit: os << "exp_unit"; break;
    case LawKind::pareto_unit_mean: os << "pareto_unit_mean(alpha=" << param_ << ")"; break;
    case LawKind::constant: os << "constant(c=" << param_ << ")"; break;
    case LawKind::table: os << "table(" << values_.size() << " atoms)"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Observables

void validate_observable(const Observable& f, std::size_t gap_count)
{
    std::visit(overloaded{
                   [&](const obs::Coordinate& c) { require_gap_label(c.gap, gap_count); },
                   [](const obs::GapSum&) {},
                   [](const obs::Lyapunov& v) {
                       if (!(v.alpha > 0.0 && v.alpha < 1.0))
                           throw std::invalid_argument("Lyapunov alpha must lie in (0, 1)");
                   },
                   [&](const obs::Power& p) {
                       require_gap_label(p.gap, gap_count);
                       if (p.k < 1) throw std::invalid_argument("power exponent must be >= 1");
                   },
               },
               f);
}

std::string describe(const Observable& f)
{
    return std::visit(overloaded{
                          [](const obs::Coordinate& c) { return "q" + std::to_string(c.gap); },
                          [](const obs::GapSum&) { return std::string("phi"); },
                          [](const obs::Lyapunov& v) {
                              std::ostringstream os;
                              os << "V(" << v.alpha << ")";
                              return os.str();
                          },
                          [](const obs::Power& p) {
                              return "y" + std::to_string(p.gap) + "^" + std::to_string(p.k);
                          },
                      },
                      f);
}

double evaluate(const Observable& f, std::span<const double> y)
{
    validate_observable(f, y.size());
    return std::visit(overloaded{
                          [&](const obs::Coordinate& c) { return y[c.gap - 1]; },
                          [&](const obs::GapSum&) { return std::accumulate(y.begin(), y.end(), 0.0); },
                          [&](const obs::Lyapunov& v) {
                              double value = 1.0, a = 1.0;
                              for (double yi : y) {
                                  a *= v.alpha;
                                  value += a * yi;
                              }
                              return value;
                          },
                          [&](const obs::Power& p) { return std::pow(y[p.gap - 1], p.k); },
                      },
                      f);
}

double total_rate(std::span<const double> gaps)
{
    return 1.0 + std::accumulate(gaps.begin(), gaps.end(), 0.0);
}

double total_rate(const SystemState& s) { return total_rate(std::span<const double>(s.gaps)); }

namespace {

struct LyapunovParts {
    double bound;   // alpha mu_1 - ((1-alpha)/2) sum alpha^i y_i^2
    double dropped; // (alpha^n / 2) y_{n-1}^2
};

LyapunovParts lyapunov_parts(std::span<const double> y, double alpha, double mu1)
{
    double s = 0.0, a = 1.0;
    for (double yi : y) {
        a *= alpha;
        s += a * yi * yi;
    }
    // a == alpha^{n-1} here
    const double last = y.back();
    return {alpha * mu1 - 0.5 * (1.0 - alpha) * s, 0.5 * (a * alpha) * last * last};
}

} // namespace

double lyapunov_drift_bound(std::span<const double> gaps, double alpha, const JumpLaw& law)
{
    validate_observable(obs::Lyapunov{alpha}, gaps.size());
    if (gaps.empty()) throw std::invalid_argument("empty gap vector");
    return lyapunov_parts(gaps, alpha, law.mean()).bound;
}

double generator_apply(std::span<const double> y, const Observable& f, const JumpLaw& law)
{
    if (y.empty()) throw std::invalid_argument("empty gap vector");
    validate_observable(f, y.size());
    const std::size_t last = y.size();
    return std::visit(
        overloaded{
            [&](const obs::Coordinate& c) {
                const std::size_t i = c.gap;
                if (i == 1) return law.mean() - 0.5 * y[0] * y[0];
                return 0.5 * (y[i - 2] * y[i - 2] - y[i - 1] * y[i - 1]);
            },
            [&](const obs::GapSum&) { return law.mean() - 0.5 * y[last - 1] * y[last - 1]; },
            [&](const obs::Lyapunov& v) {
                const auto parts = lyapunov_parts(y, v.alpha, law.mean());
                return parts.bound - parts.dropped;
            },
            [&](const obs::Power& p) {
                const int k = p.k;
                const double yi = y[p.gap - 1];
                // Own jumps: the gap shrinks to a uniform fraction of itself at rate y_i.
                const double own = -(static_cast<double>(k) / (k + 1)) * std::pow(yi, k + 1);
                double inflow = 0.0;
                if (p.gap == 1) {
                    for (int j = 1; j <= k; ++j)
                        inflow += binomial(k, j) * std::pow(yi, k - j) * law.moment(j);
                } else {
                    // y_{i-1} * int_0^1 [(y_i + u y_{i-1})^k - y_i^k] du, expanded term by term.
                    const double ahead = y[p.gap - 2];
                    for (int j = 1; j <= k; ++j)
                        inflow += binomial(k, j) * std::pow(yi, k - j) * std::pow(ahead, j + 1) /
                                  (j + 1);
                }
                return inflow + own;
            },
        },
        f);
}

// ---------------------------------------------------------------------------
// Densities and the adjoint

double density_value(const DensityKind& d, std::span<const double> y)
{
    for (double v : y)
        if (v < 0.0) return 0.0;
    return std::visit(overloaded{
                          [&](const density::ProductExpUnit&) {
                              return std::exp(-std::accumulate(y.begin(), y.end(), 0.0));
                          },
                          [&](const density::ProductExpRate& r) {
                              const double s = std::accumulate(y.begin(), y.end(), 0.0);
                              return std::pow(r.rate, static_cast<double>(y.size())) *
                                     std::exp(-r.rate * s);
                          },
                          [&](const density::Custom& c) { return c.fn(y); },
                      },
                      d);
}

namespace {

double product_exp_adjoint(std::span<const double> y, double rate)
{
    const double f = std::pow(rate, static_cast<double>(y.size())) *
                     std::exp(-rate * std::accumulate(y.begin(), y.end(), 0.0));
    // Inflow from the last gap's open boundary: int_0^inf f(y + u e_{n-1}) du = f / rate.
    // Interior transfers keep sum(y) fixed, so each contributes y_i f and cancels the
    // matching part of the exit rate f (sum y + 1); only the leader terms remain.
    const double front = (rate == 1.0) ? y[0] : std::expm1((rate - 1.0) * y[0]) / (rate - 1.0);
    return f * ((1.0 / rate - 1.0) + (front - y[0]));
}

double integrate(const std::function<double(double)>& g, double a, double b, double tol)
{
    double error = 0.0, l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, a, b, 15, tol, &error, &l1);
    if (!std::isfinite(value) || error > tol * std::max(l1, 1e-300))
        throw ToleranceError("adaptive quadrature did not reach tolerance");
    return value;
}

double quadrature_adjoint(std::span<const double> y, const DensityKind& d, double tol)
{
    const std::size_t m = y.size();
    std::vector<double> work(y.begin(), y.end());
    auto eval_shifted = [&](auto&& shift) {
        return [&, shift](double u) {
            std::copy(y.begin(), y.end(), work.begin());
            shift(work, u);
            return density_value(d, work);
        };
    };

    double total = 0.0;
    total += integrate(
        eval_shifted([m](std::vector<double>& w, double u) { w[m - 1] += u; }), 0.0,
        std::numeric_limits<double>::infinity(), tol);
    for (std::size_t i = 1; i < m; ++i) {
        total += integrate(eval_shifted([i](std::vector<double>& w, double u) {
                               w[i] -= u;
                               w[i - 1] += u;
                           }),
                           0.0, y[i], tol);
    }
    total += integrate(
        [&](double u) {
            std::copy(y.begin(), y.end(), work.begin());
            work[0] -= u;
            return density_value(d, work) * std::exp(-u);
        },
        0.0, y[0], tol);
    total -= density_value(d, y) * total_rate(y);
    return total;
}

} // namespace

double adjoint_apply(std::span<const double> y, const DensityKind& d, const AdjointMode& mode)
{
    if (y.empty()) throw std::invalid_argument("empty gap vector");
    for (double v : y)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("adjoint is evaluated on the open orthant (y > 0)");
    if (const auto* r = std::get_if<density::ProductExpRate>(&d))
        if (!(r->rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");

    if (std::holds_alternative<ClosedForm>(mode)) {
        return std::visit(overloaded{
                              [&](const density::ProductExpUnit&) { return product_exp_adjoint(y, 1.0); },
                              [&](const density::ProductExpRate& r) {
                                  return product_exp_adjoint(y, r.rate);
                              },
                              [](const density::Custom&) -> double {
                                  throw UnsupportedError(
                                      "closed-form adjoint exists only for product-exponential densities");
                              },
                          },
                          d);
    }
    const double tol = std::get<Quadrature>(mode).tol;
    if (!(tol > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
    return quadrature_adjoint(y, d, tol);
}

std::vector<double> rescale_gaps(std::span<const double> y, double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("rescaling factor must be positive");
    std::vector<double> out(y.size());
    std::transform(y.begin(), y.end(), out.begin(), [lambda](double v) { return v / lambda; });
    return out;
}

} // namespace ftl
