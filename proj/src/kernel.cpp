#include "ftl/kernel.hpp"

#include "ftl/errors.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ftl {

namespace {

std::vector<double> rate_vector(const SystemState& s)
{
    std::vector<double> w(s.n());
    w[0] = 1.0;
    for (std::size_t i = 0; i < s.gaps.size(); ++i) w[i + 1] = s.gaps[i];
    return w;
}

} // namespace

Simulator::Simulator(SystemState state, JumpLaw law, std::uint64_t rebuild_period)
    : state_(std::move(state)), law_(std::move(law))
{
    validate_state(state_);
    sampler_ = WeightedSampler(rate_vector(state_), rebuild_period);
}

Event Simulator::apply(double dt, Stream& rng)
{
    state_.clock += dt;
    ++events_;
    const std::size_t idx = sampler_.pick(rng.uniform() * sampler_.total());
    auto& y = state_.gaps;
    Event ev;
    ev.time = state_.clock;
    if (idx == 0) {
        const double z = law_.sample(rng.uniform_open());
        ev.actor = Actor::leader();
        ev.size = z;
        ev.gap_before = y[0];
        state_.leader_pos += z;
        y[0] += z;
        sampler_.update(1, y[0]);
        return ev;
    }
    const std::size_t g = idx - 1; // 0-based gap that shrinks
    const double before = y[g];
    const double u = before * rng.uniform(); // Uniform[0, Y_g), never exceeds Y_g
    ev.actor = Actor::follower(idx);
    ev.size = u;
    ev.gap_before = before;
    y[g] = before - u;
    sampler_.update(idx, y[g]);
    if (g + 1 < y.size()) {
        y[g + 1] += u;
        sampler_.update(idx + 1, y[g + 1]);
    }
    return ev;
}

Event Simulator::step(Stream& rng) { return apply(rng.exponential(sampler_.total()), rng); }

std::optional<Event> Simulator::step_within(double horizon, Stream& rng)
{
    const double dt = rng.exponential(sampler_.total());
    if (state_.clock + dt > horizon) {
        state_.clock = horizon;
        return std::nullopt;
    }
    return apply(dt, rng);
}

void Simulator::run_until(double t_end, Stream& rng, std::span<Observer* const> observers,
                          RunLimits limits)
{
    if (!(t_end >= state_.clock)) throw std::invalid_argument("t_end precedes the current clock");
    std::uint64_t count = 0;
    while (true) {
        const double dt = rng.exponential(sampler_.total());
        if (state_.clock + dt > t_end) break;
        if (count == limits.max_events)
            throw HorizonExceeded("event cap of " + std::to_string(limits.max_events) +
                                  " reached before t_end");
        ++count;
        const Event ev = apply(dt, rng);
        for (Observer* o : observers) o->on_event(state_, ev);
    }
    state_.clock = t_end;
    for (Observer* o : observers) o->on_end(state_);
}

std::pair<SystemState, Event> step(const SystemState& state, const JumpLaw& law, Stream& rng)
{
    Simulator sim(state, law);
    Event ev = sim.step(rng);
    return {sim.state(), ev};
}

SystemState run_until(const SystemState& state, double t_end, const JumpLaw& law, Stream& rng,
                      std::span<Observer* const> observers, RunLimits limits)
{
    Simulator sim(state, law);
    sim.run_until(t_end, rng, observers, limits);
    return sim.state();
}

// ---------------------------------------------------------------------------

HittingTime hitting_time_tauC(const SystemState& start, const JumpLaw& law, Stream& rng,
                              double t_cap)
{
    const Observable v = obs::Lyapunov{kLyapunovAlpha};
    HittingTime out;
    if (evaluate(v, start.gaps) <= kLyapunovLevel) return out;
    Simulator sim(start, law);
    const double t0 = start.clock;
    while (true) {
        const auto ev = sim.step_within(t0 + t_cap, rng);
        if (!ev) {
            out.tau = t_cap;
            out.censored = true;
            break;
        }
        ++out.events;
        if (evaluate(v, sim.state().gaps) <= kLyapunovLevel) {
            out.tau = ev->time - t0;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void put_le(std::ostream& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    out.write(buf, 8);
}

bool get_le(std::istream& in, double& v)
{
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
    return true;
}

} // namespace

TrajectoryLog::TrajectoryLog(std::ostream& out, LogFormat format) : out_(out), format_(format)
{
    if (format_ == LogFormat::csv) out_ << "time,actor,size,gap_before\n";
}

void TrajectoryLog::on_event(const SystemState&, const Event& e)
{
    const double actor = e.actor.kind == ActorKind::leader ? 0.0 : static_cast<double>(e.actor.gap);
    if (format_ == LogFormat::csv) {
        char line[128];
        std::snprintf(line, sizeof line, "%.17g,%zu,%.17g,%.17g\n", e.time,
                      static_cast<std::size_t>(actor), e.size, e.gap_before);
        out_ << line;
    } else {
        put_le(out_, e.time);
        put_le(out_, actor);
        put_le(out_, e.size);
        put_le(out_, e.gap_before);
    }
    ++records_;
}

std::vector<Event> read_binary_log(std::istream& in)
{
    std::vector<Event> events;
    double rec[4];
    while (get_le(in, rec[0])) {
        for (int c = 1; c < 4; ++c)
            if (!get_le(in, rec[c])) throw std::runtime_error("truncated trajectory record");
        Event e;
        e.time = rec[0];
        e.actor = rec[1] == 0.0 ? Actor::leader() : Actor::follower(static_cast<std::size_t>(rec[1]));
        e.size = rec[2];
        e.gap_before = rec[3];
        events.push_back(e);
    }
    return events;
}

} // namespace ftl
