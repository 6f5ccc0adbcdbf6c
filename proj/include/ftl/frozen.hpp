#pragma once

// The frozen-boundaries comparison process: m particles with Z_1 = 1 and Z_m = 0
// held fixed; interior particle i jumps at rate Z_{i-1} - Z_i to Uniform(Z_i, Z_{i-1}).

#include "ftl/rng.hpp"
#include "ftl/sampler.hpp"

#include <cstdint>
#include <vector>

namespace ftl {

/// 1/(2e): the level the penultimate particle has to reach.
inline constexpr double kFrozenLevel = 0.18393972058572117;

struct FrozenState {
    std::vector<double> z; // z[0] = Z_1 = 1, z[m-1] = Z_m = 0
    double clock = 0.0;

    /// All interior particles start at 0.
    static FrozenState initial(std::size_t m);
    std::size_t m() const noexcept { return z.size(); }
};

class FrozenSimulator {
public:
    explicit FrozenSimulator(FrozenState state);

    const FrozenState& state() const noexcept { return state_; }
    std::uint64_t events() const noexcept { return events_; }

    /// Applies the next jump if it occurs by `horizon`; returns the 1-based label of the
    /// particle that moved, or 0 when the clock was moved to `horizon` instead.
    std::size_t step_within(double horizon, Stream& rng);

private:
    FrozenState state_;
    WeightedSampler sampler_; // index j <-> particle j + 2
    std::uint64_t events_ = 0;
};

struct BetaSample {
    double beta = 0.0; // t_cap when censored
    bool censored = false;
    std::uint64_t events = 0;
};

/// First time Z_{m-1} >= 1/(2e), starting from the all-zero interior.
BetaSample run_frozen_beta(std::size_t m, Stream& rng, double t_cap);

} // namespace ftl
