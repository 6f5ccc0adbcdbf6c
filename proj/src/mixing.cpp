#include "ftl/mixing.hpp"

#include "ftl/kernel.hpp"
#include "ftl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftl {

namespace {

void check_grid(const std::vector<double>& t_grid)
{
    if (t_grid.empty()) throw std::invalid_argument("empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0) || !std::isfinite(t_grid[i]))
            throw std::invalid_argument("grid times must be finite and >= 0");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("time grid must be increasing");
    }
}

} // namespace

std::vector<double> initial_gaps(std::size_t n, const InitKind& init)
{
    if (n < 2) throw std::invalid_argument("need n >= 2");
    switch (init.tag) {
    case InitKind::Tag::zeros:
        return std::vector<double>(n - 1, 0.0);
    case InitKind::Tag::spread:
        if (!(init.scale >= 0.0) || !std::isfinite(init.scale))
            throw std::invalid_argument("spread scale must be finite and >= 0");
        return std::vector<double>(n - 1, init.scale);
    case InitKind::Tag::custom:
        if (init.gaps.size() != n - 1) throw std::invalid_argument("custom init needs n - 1 gaps");
        validate_state(SystemState(init.gaps));
        return init.gaps;
    }
    return {};
}

std::vector<CouplingOutcome> coupling_replicas(std::size_t n, const InitKind& init, double t_max,
                                               std::size_t replicas, std::uint64_t seed,
                                               unsigned workers, const JumpLaw& law,
                                               std::uint64_t init_tag)
{
    const std::vector<double> y_a = initial_gaps(n, init);
    std::vector<CouplingOutcome> out(replicas);
    parallel_for(replicas, workers, [&](std::size_t r) {
        Stream partner = Stream::for_replica(seed, r, StreamRole::partner).split(init_tag);
        Stream sim = Stream::for_replica(seed, r, StreamRole::simulation).split(init_tag);
        auto y_b = sample_stationary_gaps(n, 1.0, partner);
        out[r] = run_coupling(y_a, std::move(y_b), law, t_max, sim);
    });
    return out;
}

std::vector<TailEstimate> tails_from_outcomes(const std::vector<CouplingOutcome>& outcomes,
                                              const std::vector<double>& t_grid)
{
    if (outcomes.empty()) throw std::invalid_argument("need at least one replica");
    std::vector<TailEstimate> tails;
    tails.reserve(t_grid.size());
    for (double t : t_grid) {
        const auto exceed = static_cast<std::size_t>(
            std::count_if(outcomes.begin(), outcomes.end(),
                          [t](const CouplingOutcome& o) { return !o.tau || *o.tau > t; }));
        tails.push_back(wilson_interval(exceed, outcomes.size()));
    }
    return tails;
}

std::vector<TailEstimate> coupling_tails(std::size_t n, const InitKind& init,
                                         const std::vector<double>& t_grid, std::size_t replicas,
                                         std::uint64_t seed, unsigned workers, const JumpLaw& law,
                                         std::uint64_t init_tag)
{
    check_grid(t_grid);
    if (replicas < 1) throw std::invalid_argument("need at least one replica");
    return tails_from_outcomes(
        coupling_replicas(n, init, t_grid.back(), replicas, seed, workers, law, init_tag), t_grid);
}

TailEstimate coupling_tail(std::size_t n, const InitKind& init, double t, std::size_t replicas,
                           std::uint64_t seed, unsigned workers, const JumpLaw& law)
{
    if (replicas < 100) throw std::invalid_argument("coupling tail needs at least 100 replicas");
    return coupling_tails(n, init, {t}, replicas, seed, workers, law).front();
}

MixingEstimate tmix_upper_estimate(std::size_t n, const std::vector<double>& t_grid,
                                   std::size_t replicas, std::uint64_t seed, unsigned workers)
{
    MixingEstimate m;
    m.n = n;
    m.t_grid = t_grid;
    const auto zeros = coupling_tails(n, InitKind::zeros(), t_grid, replicas, seed, workers,
                                      JumpLaw::exp_unit(), 0);
    const auto spread = coupling_tails(n, InitKind::spread(10.0), t_grid, replicas, seed, workers,
                                       JumpLaw::exp_unit(), 1);
    for (std::size_t g = 0; g < t_grid.size(); ++g) {
        const TailEstimate& worst = spread[g].ci_high > zeros[g].ci_high ? spread[g] : zeros[g];
        m.tails.push_back(worst);
        if (!m.t_mix_upper && worst.ci_high < 0.25) m.t_mix_upper = t_grid[g];
    }
    m.upper_resolved = m.t_mix_upper.has_value();
    return m;
}

void resolve_lower(MixingEstimate& m)
{
    const double stationary = static_cast<double>(m.n - 1);
    m.lower_bounds.clear();
    m.t_mix_lower.reset();
    std::optional<std::size_t> last;
    for (std::size_t g = 0; g < m.t_grid.size(); ++g) {
        m.lower_bounds.push_back(tv_lower_bound(m.phi_mean[g], stationary, m.phi_var[g], stationary));
        if (m.lower_bounds.back() > 0.25) last = g;
    }
    if (last) m.t_mix_lower = m.t_grid[*last];
    m.lower_resolved = last && *last + 1 < m.t_grid.size();
}

void merge_upper(MixingEstimate& m, const MixingEstimate& upper)
{
    m.tails = upper.tails;
    m.t_mix_upper = upper.t_mix_upper;
    m.upper_resolved = upper.upper_resolved;
    m.inconsistent = m.t_mix_lower && m.t_mix_upper && *m.t_mix_lower > *m.t_mix_upper;
}

MixingEstimate tmix_lower_estimate(std::size_t n, double delta, const std::vector<double>& t_grid,
                                   std::size_t replicas, std::uint64_t seed, unsigned workers)
{
    if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0, 1)");
    if (n < 2) throw std::invalid_argument("need n >= 2");
    if (replicas < 2) throw std::invalid_argument("need at least two replicas");
    check_grid(t_grid);
    const JumpLaw law = JumpLaw::exp_unit();
    const std::size_t gcount = t_grid.size();
    // phi[r * gcount + g]
    std::vector<double> phi(replicas * gcount);
    parallel_for(replicas, workers, [&](std::size_t r) {
        Stream rng = Stream::for_replica(seed, r, StreamRole::simulation);
        Simulator sim(SystemState(std::vector<double>(n - 1, 1.0 - delta)), law);
        for (std::size_t g = 0; g < gcount; ++g) {
            sim.run_until(t_grid[g], rng);
            double s = 0.0;
            for (double y : sim.state().gaps) s += y;
            phi[r * gcount + g] = s;
        }
    });
    MixingEstimate m;
    m.n = n;
    m.t_grid = t_grid;
    std::vector<double> column(replicas);
    for (std::size_t g = 0; g < gcount; ++g) {
        for (std::size_t r = 0; r < replicas; ++r) column[r] = phi[r * gcount + g];
        const MeanVar mv = mean_var(column);
        m.phi_mean.push_back(mv.mean);
        m.phi_var.push_back(mv.variance);
    }
    resolve_lower(m);
    return m;
}

std::vector<double> geometric_grid(double t0, double t1, double ratio)
{
    if (!(t0 > 0.0) || !(t1 >= t0) || !(ratio > 1.0))
        throw std::invalid_argument("geometric grid needs 0 < t0 <= t1 and ratio > 1");
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double t = t0 * std::pow(ratio, k);
        grid.push_back(t);
        if (t >= t1) break;
    }
    return grid;
}

} // namespace ftl
