#pragma once

// Mixing-time surrogates: a lower bound from the gap-sum statistic and an upper
// bound from prefix-coalescence tails. Neither is the total variation distance itself.

#include "ftl/coupling.hpp"
#include "ftl/model.hpp"
#include "ftl/stats.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ftl {

/// Initial gap vector of the system compared against a stationary partner.
struct InitKind {
    enum class Tag { zeros, spread, custom };
    Tag tag = Tag::zeros;
    double scale = 10.0;       // spread: every gap equals `scale`
    std::vector<double> gaps;  // custom

    static InitKind zeros() { return {}; }
    static InitKind spread(double scale) { return {Tag::spread, scale, {}}; }
    static InitKind custom(std::vector<double> y) { return {Tag::custom, 0.0, std::move(y)}; }
};

std::vector<double> initial_gaps(std::size_t n, const InitKind& init);

struct MixingEstimate {
    std::size_t n = 0;
    std::vector<double> t_grid;

    // Upper side: worst-over-inits coupling tail per grid point.
    std::vector<TailEstimate> tails;
    std::optional<double> t_mix_upper;
    bool upper_resolved = false;

    // Lower side: gap-sum moments and the resulting bound per grid point.
    std::vector<double> phi_mean;
    std::vector<double> phi_var;
    std::vector<double> lower_bounds;
    std::optional<double> t_mix_lower;
    /// A grid point qualifies and a later one does not.
    bool lower_resolved = false;

    /// Set when both sides resolve and t_mix_lower > t_mix_upper.
    bool inconsistent = false;
};

/// One coupled run per replica from `init` against a fresh Exp(1) product partner.
std::vector<CouplingOutcome> coupling_replicas(std::size_t n, const InitKind& init, double t_max,
                                               std::size_t replicas, std::uint64_t seed,
                                               unsigned workers = 1,
                                               const JumpLaw& law = JumpLaw::exp_unit(),
                                               std::uint64_t init_tag = 0);

/// Tail estimates P(tau > t) per grid time from coupling outcomes (censored counts as > t).
std::vector<TailEstimate> tails_from_outcomes(const std::vector<CouplingOutcome>& outcomes,
                                              const std::vector<double>& t_grid);

/// Fraction of replicas whose prefix-coalescence time against a fresh Exp(1) product
/// partner exceeds each grid time (one coupled run per replica, to the last grid time).
std::vector<TailEstimate> coupling_tails(std::size_t n, const InitKind& init,
                                         const std::vector<double>& t_grid, std::size_t replicas,
                                         std::uint64_t seed, unsigned workers = 1,
                                         const JumpLaw& law = JumpLaw::exp_unit(),
                                         std::uint64_t init_tag = 0);

/// Single-time form; needs at least 100 replicas.
TailEstimate coupling_tail(std::size_t n, const InitKind& init, double t, std::size_t replicas,
                           std::uint64_t seed, unsigned workers = 1,
                           const JumpLaw& law = JumpLaw::exp_unit());

/// Worst of {zeros, spread(10)}; t_mix_upper is the smallest t with ci_high < 1/4.
MixingEstimate tmix_upper_estimate(std::size_t n, const std::vector<double>& t_grid,
                                   std::size_t replicas, std::uint64_t seed, unsigned workers = 1);

/// Starts at (1 - delta) * 1 and compares the gap sum with its stationary mean and
/// variance, both n - 1. t_mix_lower is the largest t whose bound exceeds 1/4.
MixingEstimate tmix_lower_estimate(std::size_t n, double delta, const std::vector<double>& t_grid,
                                   std::size_t replicas, std::uint64_t seed, unsigned workers = 1);

/// Fills the derived fields of the lower side from phi moments.
void resolve_lower(MixingEstimate& m);
/// Copies the upper side of `upper` into `m` and flags inconsistency.
void merge_upper(MixingEstimate& m, const MixingEstimate& upper);

/// Geometric grid t0 * ratio^k up to and including the first point >= t1.
std::vector<double> geometric_grid(double t0, double t1, double ratio);

} // namespace ftl
