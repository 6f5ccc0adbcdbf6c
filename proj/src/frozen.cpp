#include "ftl/frozen.hpp"

#include <algorithm>
#include <stdexcept>

namespace ftl {

FrozenState FrozenState::initial(std::size_t m)
{
    if (m < 3) throw std::invalid_argument("frozen-boundaries process needs m >= 3");
    FrozenState s;
    s.z.assign(m, 0.0);
    s.z[0] = 1.0;
    return s;
}

FrozenSimulator::FrozenSimulator(FrozenState state) : state_(std::move(state))
{
    const auto& z = state_.z;
    if (z.size() < 3 || z.front() != 1.0 || z.back() != 0.0)
        throw std::invalid_argument("frozen state needs m >= 3, Z_1 = 1 and Z_m = 0");
    std::vector<double> w(z.size() - 2);
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = z[j] - z[j + 1];
        if (!(w[j] >= 0.0)) throw std::invalid_argument("frozen positions must be nonincreasing");
    }
    sampler_ = WeightedSampler(w);
}

std::size_t FrozenSimulator::step_within(double horizon, Stream& rng)
{
    auto& z = state_.z;
    const double rate = sampler_.total();
    // Rate 0 only once every interior particle sits on the leader.
    const double dt = rate > 0.0 ? rng.exponential(rate) : horizon - state_.clock + 1.0;
    if (state_.clock + dt > horizon) {
        state_.clock = horizon;
        return 0;
    }
    state_.clock += dt;
    ++events_;
    const std::size_t j = sampler_.pick(rng.uniform() * rate);
    const std::size_t i = j + 1; // 0-based index of the moving particle
    const double target = z[i] + (z[i - 1] - z[i]) * rng.uniform();
    z[i] = std::min(target, z[i - 1]);
    sampler_.update(j, z[i - 1] - z[i]);
    if (j + 1 < sampler_.size()) sampler_.update(j + 1, z[i] - z[i + 1]);
    return i + 1;
}

BetaSample run_frozen_beta(std::size_t m, Stream& rng, double t_cap)
{
    FrozenSimulator sim(FrozenState::initial(m));
    BetaSample out;
    const std::size_t watched = m - 1; // 1-based label of Z_{m-1}
    while (true) {
        const std::size_t moved = sim.step_within(t_cap, rng);
        if (moved == 0) {
            out.beta = t_cap;
            out.censored = true;
            break;
        }
        if (moved == watched && sim.state().z[watched - 1] >= kFrozenLevel) {
            out.beta = sim.state().clock;
            break;
        }
    }
    out.events = sim.events();
    return out;
}

} // namespace ftl
