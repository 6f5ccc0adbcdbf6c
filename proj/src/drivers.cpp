#include "ftl/drivers.hpp"

#include "ftl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftl {

std::vector<double> draw_start(std::size_t n, const StartSpec& start, std::uint64_t seed,
                               std::size_t replica)
{
    if (start.tag == StartSpec::Tag::fixed) {
        if (start.gaps.size() != n - 1) throw std::invalid_argument("start needs n - 1 gaps");
        return start.gaps;
    }
    Stream rng = Stream::for_replica(seed, replica, StreamRole::initial_state);
    return sample_stationary_gaps(n, start.rate, rng);
}

std::vector<std::vector<Snapshot>> gap_snapshots(std::size_t n, const StartSpec& start,
                                                 const JumpLaw& law,
                                                 const std::vector<double>& times,
                                                 std::size_t replicas, std::uint64_t seed,
                                                 unsigned workers)
{
    if (n < 2) throw std::invalid_argument("need n >= 2");
    for (std::size_t g = 0; g < times.size(); ++g)
        if (!(times[g] >= 0.0) || (g > 0 && !(times[g] > times[g - 1])))
            throw std::invalid_argument("snapshot times must be increasing and >= 0");
    std::vector<std::vector<Snapshot>> out(times.size(), std::vector<Snapshot>(replicas));
    parallel_for(replicas, workers, [&](std::size_t r) {
        Stream rng = Stream::for_replica(seed, r, StreamRole::simulation);
        SystemState s0(draw_start(n, start, seed, r));
        validate_state(s0);
        Simulator sim(std::move(s0), law);
        for (std::size_t g = 0; g < times.size(); ++g) {
            sim.run_until(times[g], rng);
            out[g][r] = {sim.state().gaps, sim.state().leader_pos, sim.events()};
        }
    });
    return out;
}

std::vector<DynkinEstimate> dynkin_estimate(std::span<const double> y,
                                            const std::vector<Observable>& fs, const JumpLaw& law,
                                            double h, std::size_t replicas, std::uint64_t seed,
                                            unsigned workers)
{
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    if (replicas < 2) throw std::invalid_argument("need at least two replicas");
    for (const auto& f : fs) validate_observable(f, y.size());
    const std::vector<double> y0(y.begin(), y.end());
    std::vector<double> f0;
    for (const auto& f : fs) f0.push_back(evaluate(f, y0));

    // Fixed chunking keeps the floating-point reduction order independent of workers.
    constexpr std::size_t kChunk = 4096;
    const std::size_t chunks = (replicas + kChunk - 1) / kChunk;
    const std::size_t k = fs.size();
    std::vector<double> sums(chunks * k * 2, 0.0);
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t lo = c * kChunk, hi = std::min(replicas, lo + kChunk);
        for (std::size_t r = lo; r < hi; ++r) {
            Stream rng = Stream::for_replica(seed, r, StreamRole::simulation);
            Simulator sim(SystemState(y0), law);
            sim.run_until(h, rng);
            if (sim.events() == 0) continue;
            for (std::size_t j = 0; j < k; ++j) {
                const double d = (evaluate(fs[j], sim.state().gaps) - f0[j]) / h;
                sums[(c * k + j) * 2] += d;
                sums[(c * k + j) * 2 + 1] += d * d;
            }
        }
    });
    std::vector<DynkinEstimate> out(k);
    const double nr = static_cast<double>(replicas);
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sums[(c * k + j) * 2];
            s2 += sums[(c * k + j) * 2 + 1];
        }
        const double mean = s / nr;
        const double var = std::max(0.0, (s2 - nr * mean * mean) / (nr - 1.0));
        out[j] = {mean, std::sqrt(var / nr)};
    }
    return out;
}

double dynkin_bias_allowance(std::span<const double> y, const Observable& f, double h)
{
    const double r = total_rate(y);
    return h * r * r * (1.0 + std::abs(evaluate(f, y)));
}

std::vector<HittingTime> hitting_times(std::span<const double> start, const JumpLaw& law,
                                       double t_cap, std::size_t replicas, std::uint64_t seed,
                                       unsigned workers)
{
    const SystemState s0(std::vector<double>(start.begin(), start.end()));
    validate_state(s0);
    std::vector<HittingTime> out(replicas);
    parallel_for(replicas, workers, [&](std::size_t r) {
        Stream rng = Stream::for_replica(seed, r, StreamRole::simulation);
        out[r] = hitting_time_tauC(s0, law, rng, t_cap);
    });
    return out;
}

std::vector<BetaSample> frozen_betas(std::size_t m, double t_cap, std::size_t replicas,
                                     std::uint64_t seed, unsigned workers)
{
    std::vector<BetaSample> out(replicas);
    parallel_for(replicas, workers, [&](std::size_t r) {
        Stream rng = Stream::for_replica(seed, r, StreamRole::simulation).split(m);
        out[r] = run_frozen_beta(m, rng, t_cap);
    });
    return out;
}

std::vector<DominanceResult> dominance_runs(std::size_t m, double t_end, LeaderPath path,
                                            std::size_t replicas, std::uint64_t seed,
                                            unsigned workers)
{
    std::vector<DominanceResult> out(replicas);
    const std::uint64_t tag = 2 * m + (path == LeaderPath::exp_jumps ? 1 : 0);
    parallel_for(replicas, workers, [&](std::size_t r) {
        Stream rng = Stream::for_replica(seed, r, StreamRole::simulation).split(tag);
        out[r] = dominance_run(m, t_end, rng, path);
    });
    return out;
}

std::vector<TailEstimate> survival(const std::vector<double>& values,
                                   const std::vector<double>& t_grid)
{
    std::vector<TailEstimate> out;
    for (double t : t_grid) {
        const auto k = static_cast<std::size_t>(
            std::count_if(values.begin(), values.end(), [t](double v) { return v > t; }));
        out.push_back(wilson_interval(k, values.size()));
    }
    return out;
}

} // namespace ftl
