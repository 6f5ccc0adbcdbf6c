#pragma once

// Synchronized-leader coalescent coupling of two gap processes, and the
// shared-uniform thinning coupling against the frozen-boundaries process.

#include "ftl/kernel.hpp"
#include "ftl/model.hpp"
#include "ftl/rng.hpp"
#include "ftl/sampler.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ftl {

/**
 * Two gap vectors driven by one leader.
 *
 * `coalesced[i]` records that gap i was made bit-equal in both systems by a
 * coalescence write (or was equal at the start) and has not been disturbed since.
 * `coalesced_prefix` counts leading pairs whose particles coincide; it only grows.
 */
struct CoupledState {
    double leader_pos = 0.0;
    std::vector<double> gaps_a;
    std::vector<double> gaps_b;
    std::vector<char> coalesced;
    std::size_t coalesced_prefix = 0;
    double clock = 0.0;

    static CoupledState make(std::vector<double> a, std::vector<double> b);
    std::size_t n() const noexcept { return gaps_a.size() + 1; }
    bool fully_coalesced() const noexcept { return coalesced_prefix == gaps_a.size(); }
};

enum class CoupledKind : std::uint8_t { leader, faster_only, coalescence };

struct CoupledEvent {
    double time = 0.0;
    CoupledKind kind = CoupledKind::leader;
    std::size_t gap = 0; // 1-based pair label; 0 for the leader
    double size = 0.0;   // leader jump, faster-only jump, or U* for coalescence
    double pair_min = 0.0;
    double pair_diff = 0.0;
    /// For faster-only jumps: the faster system still has the strictly larger gap.
    bool faster_kept_lead = true;
};

class CoupledSimulator {
public:
    CoupledSimulator(CoupledState state, JumpLaw law);

    const CoupledState& state() const noexcept { return state_; }
    const WeightedSampler& sampler() const noexcept { return sampler_; }
    std::uint64_t events() const noexcept { return events_; }

    std::optional<CoupledEvent> step_within(double horizon, Stream& rng);
    CoupledEvent step(Stream& rng);

    /// Runs to t_end (clock set to t_end).
    void run_until(double t_end, Stream& rng);

private:
    CoupledEvent apply(double dt, Stream& rng);
    void add_to_gap(std::size_t g, double inc_a, double inc_b);
    void refresh_weight(std::size_t g);

    CoupledState state_;
    JumpLaw law_;
    WeightedSampler sampler_; // index 0: leader (1); index g+1: max(a_g, b_g)
    std::uint64_t events_ = 0;
};

/// Single coupled event from `cs`; convenience over CoupledSimulator.
std::pair<CoupledState, CoupledEvent> coupled_step(const CoupledState& cs, const JumpLaw& law,
                                                   Stream& rng);

struct CouplingOutcome {
    /// Prefix-completion time; an upper bound for the true coupling time.
    std::optional<double> tau;
    bool censored = false;
    std::uint64_t events = 0;
    std::vector<std::pair<double, std::size_t>> prefix_history;
};

CouplingOutcome run_coupling(std::vector<double> y_a, std::vector<double> y_b, const JumpLaw& law,
                             double t_max, Stream& rng, bool record_history = false);

/// n - 1 iid Exponential(lambda) gaps.
std::vector<double> sample_stationary_gaps(std::size_t n, double lambda, Stream& rng);

// ---------------------------------------------------------------------------
// Thinning coupling of an m-particle system (arbitrary nondecreasing leader path)
// with the frozen-boundaries process.

enum class LeaderPath { frozen, exp_jumps };

struct DominanceEvent {
    double time = 0.0;
    double u = 0.0;
    std::size_t x_moved = 0; // 1-based particle label, 0 if none
    std::size_t z_moved = 0;
};

struct DominanceResult {
    bool ok = true;
    std::optional<DominanceEvent> violation;
    std::uint64_t events = 0;
    std::vector<double> x; // final X positions
    std::vector<double> z; // final Z positions
};

/// Start configuration of the dominating system: x_1 >= 1, nonincreasing, x_m = 0.
void validate_s0(const std::vector<double>& x);

DominanceResult dominance_run(std::size_t m, double t_end, Stream& rng, LeaderPath path,
                              std::vector<double> x0 = {});

} // namespace ftl
