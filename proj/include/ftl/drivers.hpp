#pragma once

// Replica-parallel Monte Carlo drivers shared by the CLI and the test suites.
// Replica r draws from streams keyed by (seed, r, role), so every result is
// independent of the worker count.

#include "ftl/coupling.hpp"
#include "ftl/frozen.hpp"
#include "ftl/kernel.hpp"
#include "ftl/model.hpp"
#include "ftl/stats.hpp"

#include <cstdint>
#include <vector>

namespace ftl {

/// Where a replica starts: a fixed gap vector or a fresh Exp(rate) product draw.
struct StartSpec {
    enum class Tag { fixed, stationary };
    Tag tag = Tag::fixed;
    std::vector<double> gaps; // fixed
    double rate = 1.0;        // stationary

    static StartSpec fixed(std::vector<double> y) { return {Tag::fixed, std::move(y), 1.0}; }
    static StartSpec stationary(double rate = 1.0) { return {Tag::stationary, {}, rate}; }
};

std::vector<double> draw_start(std::size_t n, const StartSpec& start, std::uint64_t seed,
                               std::size_t replica);

struct Snapshot {
    std::vector<double> gaps;
    double leader_displacement = 0.0;
    std::uint64_t events = 0;
};

/// Gap vector of every replica at each time in `times` (increasing); result[g][r].
std::vector<std::vector<Snapshot>> gap_snapshots(std::size_t n, const StartSpec& start,
                                                 const JumpLaw& law,
                                                 const std::vector<double>& times,
                                                 std::size_t replicas, std::uint64_t seed,
                                                 unsigned workers = 1);

struct DynkinEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// (E_y f(Y(h)) - f(y)) / h for each observable, over `replicas` runs of length h.
std::vector<DynkinEstimate> dynkin_estimate(std::span<const double> y,
                                            const std::vector<Observable>& fs, const JumpLaw& law,
                                            double h, std::size_t replicas, std::uint64_t seed,
                                            unsigned workers = 1);

/// Allowance for the O(h) bias of the Dynkin quotient: h * R^2 * (1 + |f(y)|), R the total rate.
double dynkin_bias_allowance(std::span<const double> y, const Observable& f, double h);

std::vector<HittingTime> hitting_times(std::span<const double> start, const JumpLaw& law,
                                       double t_cap, std::size_t replicas, std::uint64_t seed,
                                       unsigned workers = 1);

std::vector<BetaSample> frozen_betas(std::size_t m, double t_cap, std::size_t replicas,
                                     std::uint64_t seed, unsigned workers = 1);

std::vector<DominanceResult> dominance_runs(std::size_t m, double t_end, LeaderPath path,
                                            std::size_t replicas, std::uint64_t seed,
                                            unsigned workers = 1);

/// Empirical P(X > t) with Wilson intervals; censored values count as exceeding.
std::vector<TailEstimate> survival(const std::vector<double>& values,
                                   const std::vector<double>& t_grid);

} // namespace ftl
