#include "ftl/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftl {

CoupledState CoupledState::make(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("coupled gap vectors must be nonempty and of equal length");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] >= 0.0) || !(b[i] >= 0.0) || !std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw std::invalid_argument("gaps must be finite and nonnegative");
    CoupledState s;
    s.coalesced.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) s.coalesced[i] = a[i] == b[i];
    s.gaps_a = std::move(a);
    s.gaps_b = std::move(b);
    while (s.coalesced_prefix < s.coalesced.size() && s.coalesced[s.coalesced_prefix])
        ++s.coalesced_prefix;
    return s;
}

CoupledSimulator::CoupledSimulator(CoupledState state, JumpLaw law)
    : state_(std::move(state)), law_(std::move(law))
{
    std::vector<double> w(state_.gaps_a.size() + 1);
    w[0] = 1.0;
    for (std::size_t g = 0; g < state_.gaps_a.size(); ++g)
        w[g + 1] = std::max(state_.gaps_a[g], state_.gaps_b[g]);
    sampler_ = WeightedSampler(w);
}

void CoupledSimulator::refresh_weight(std::size_t g)
{
    sampler_.update(g + 1, std::max(state_.gaps_a[g], state_.gaps_b[g]));
}

void CoupledSimulator::add_to_gap(std::size_t g, double inc_a, double inc_b)
{
    auto& s = state_;
    if (g >= s.gaps_a.size()) return;
    if (s.coalesced[g] && inc_a == inc_b) {
        const double v = s.gaps_a[g] + inc_a;
        s.gaps_a[g] = v;
        s.gaps_b[g] = v;
    } else {
        s.gaps_a[g] += inc_a;
        s.gaps_b[g] += inc_b;
        if (inc_a != inc_b) s.coalesced[g] = 0;
    }
    refresh_weight(g);
}

CoupledEvent CoupledSimulator::apply(double dt, Stream& rng)
{
    auto& s = state_;
    s.clock += dt;
    ++events_;
    CoupledEvent ev;
    ev.time = s.clock;
    const std::size_t idx = sampler_.pick(rng.uniform() * sampler_.total());
    if (idx == 0) {
        const double z = law_.sample(rng.uniform_open());
        s.leader_pos += z;
        ev.kind = CoupledKind::leader;
        ev.size = z;
        add_to_gap(0, z, z);
        return ev;
    }

    const std::size_t g = idx - 1;
    ev.gap = idx;
    if (s.coalesced[g]) {
        // Equal gaps: every jump is a joint jump by the same amount.
        const double before = s.gaps_a[g];
        const double u = before * rng.uniform();
        const double common = before - u;
        s.gaps_a[g] = common;
        s.gaps_b[g] = common;
        refresh_weight(g);
        add_to_gap(g + 1, u, u);
        ev.kind = CoupledKind::coalescence;
        ev.size = u;
        ev.pair_min = before;
        return ev;
    }

    const bool a_faster = s.gaps_a[g] >= s.gaps_b[g];
    const double hi = a_faster ? s.gaps_a[g] : s.gaps_b[g];
    const double lo = a_faster ? s.gaps_b[g] : s.gaps_a[g];
    const double diff = hi - lo;
    // One uniform on [0, hi) decides the type and carries the jump: below diff it is a
    // faster-only jump of size Uniform(0, diff), above it U* ~ Uniform(diff, hi).
    const double v = hi * rng.uniform();
    ev.pair_min = lo;
    ev.pair_diff = diff;
    ev.size = v;
    if (v < diff) {
        ev.kind = CoupledKind::faster_only;
        const double after = hi - v;
        (a_faster ? s.gaps_a[g] : s.gaps_b[g]) = after;
        ev.faster_kept_lead = after > lo;
        refresh_weight(g);
        add_to_gap(g + 1, a_faster ? v : 0.0, a_faster ? 0.0 : v);
        return ev;
    }

    ev.kind = CoupledKind::coalescence;
    const double common = hi - v;
    s.gaps_a[g] = common;
    s.gaps_b[g] = common;
    s.coalesced[g] = 1;
    refresh_weight(g);
    const double slow = v - diff;
    add_to_gap(g + 1, a_faster ? v : slow, a_faster ? slow : v);
    while (s.coalesced_prefix < s.coalesced.size() && s.coalesced[s.coalesced_prefix])
        ++s.coalesced_prefix;
    return ev;
}

std::optional<CoupledEvent> CoupledSimulator::step_within(double horizon, Stream& rng)
{
    const double dt = rng.exponential(sampler_.total());
    if (state_.clock + dt > horizon) {
        state_.clock = horizon;
        return std::nullopt;
    }
    return apply(dt, rng);
}

CoupledEvent CoupledSimulator::step(Stream& rng)
{
    return apply(rng.exponential(sampler_.total()), rng);
}

void CoupledSimulator::run_until(double t_end, Stream& rng)
{
    if (!(t_end >= state_.clock)) throw std::invalid_argument("t_end precedes the current clock");
    while (step_within(t_end, rng)) {
    }
}

std::pair<CoupledState, CoupledEvent> coupled_step(const CoupledState& cs, const JumpLaw& law,
                                                   Stream& rng)
{
    CoupledSimulator sim(cs, law);
    CoupledEvent ev = sim.step(rng);
    return {sim.state(), ev};
}

CouplingOutcome run_coupling(std::vector<double> y_a, std::vector<double> y_b, const JumpLaw& law,
                             double t_max, Stream& rng, bool record_history)
{
    CoupledSimulator sim(CoupledState::make(std::move(y_a), std::move(y_b)), law);
    CouplingOutcome out;
    std::size_t last_prefix = sim.state().coalesced_prefix;
    if (record_history) out.prefix_history.emplace_back(0.0, last_prefix);
    if (sim.state().fully_coalesced()) {
        out.tau = 0.0;
        return out;
    }
    while (true) {
        const auto ev = sim.step_within(t_max, rng);
        if (!ev) {
            out.censored = true;
            break;
        }
        const std::size_t p = sim.state().coalesced_prefix;
        if (record_history && p != last_prefix) out.prefix_history.emplace_back(ev->time, p);
        last_prefix = p;
        if (sim.state().fully_coalesced()) {
            out.tau = ev->time;
            break;
        }
    }
    out.events = sim.events();
    return out;
}

std::vector<double> sample_stationary_gaps(std::size_t n, double lambda, Stream& rng)
{
    if (n < 2) throw std::invalid_argument("need n >= 2");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("exponential rate must be positive");
    std::vector<double> y(n - 1);
    for (double& v : y) v = rng.exponential(lambda);
    return y;
}

// ---------------------------------------------------------------------------

void validate_s0(const std::vector<double>& x)
{
    if (x.size() < 3) throw std::invalid_argument("dominance coupling needs m >= 3");
    if (!(x.front() >= 1.0)) throw std::invalid_argument("S0 requires x_1 >= 1");
    if (x.back() != 0.0) throw std::invalid_argument("S0 requires x_m = 0");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] <= x[i - 1]) || !std::isfinite(x[i]))
            throw std::invalid_argument("S0 positions must be nonincreasing");
}

DominanceResult dominance_run(std::size_t m, double t_end, Stream& rng, LeaderPath path,
                              std::vector<double> x0)
{
    if (m < 3) throw std::invalid_argument("dominance coupling needs m >= 3");
    if (x0.empty()) {
        x0.assign(m, 0.0);
        x0[0] = 1.0;
    }
    if (x0.size() != m) throw std::invalid_argument("initial configuration must have m particles");
    validate_s0(x0);

    DominanceResult out;
    auto& x = out.x;
    auto& z = out.z;
    x = std::move(x0);
    z.assign(m, 0.0);
    z[0] = 1.0;
    const double leader_rate = path == LeaderPath::exp_jumps ? 1.0 : 0.0;
    const JumpLaw leader_law = JumpLaw::exp_unit();
    double clock = 0.0;

    while (true) {
        const double total = x[0] + leader_rate;
        const double dt = rng.exponential(total);
        if (clock + dt > t_end) break;
        clock += dt;
        ++out.events;
        if (rng.uniform() * total < leader_rate) {
            x[0] += leader_law.sample(rng.uniform_open());
            continue;
        }
        DominanceEvent ev;
        ev.time = clock;
        const double u = x[0] * rng.uniform();
        ev.u = u;
        if (u > x[m - 1] && u < x[0]) {
            for (std::size_t i = 1; i < m; ++i) {
                if (u > x[i] && u < x[i - 1]) {
                    x[i] = u;
                    ev.x_moved = i + 1;
                    break;
                }
            }
        }
        if (u > z[m - 2] && u < 1.0) {
            for (std::size_t j = 1; j + 1 < m; ++j) {
                if (u > z[j] && u < z[j - 1]) {
                    z[j] = u;
                    ev.z_moved = j + 1;
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (z[j] > x[j]) {
                out.ok = false;
                out.violation = ev;
                return out;
            }
        }
    }
    return out;
}

} // namespace ftl
