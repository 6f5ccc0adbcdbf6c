#pragma once

// Exact event-driven simulation of the n-particle follow-the-leader system.

#include "ftl/model.hpp"
#include "ftl/rng.hpp"
#include "ftl/sampler.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace ftl {

enum class ActorKind : std::uint8_t { leader, follower };

/// Who jumped. For followers `gap` is the 1-based label of the gap that shrank
/// (particle gap + 1 moved).
struct Actor {
    ActorKind kind = ActorKind::leader;
    std::size_t gap = 0;

    static constexpr Actor leader() noexcept { return {ActorKind::leader, 0}; }
    static constexpr Actor follower(std::size_t gap) noexcept { return {ActorKind::follower, gap}; }
    friend bool operator==(const Actor&, const Actor&) = default;
};

struct Event {
    double time = 0.0;
    Actor actor;
    double size = 0.0;       // jump length
    double gap_before = 0.0; // gap 1 for the leader, gap `actor.gap` for a follower

    friend bool operator==(const Event&, const Event&) = default;
};

/// Callback contract shared by trajectory recording, detection and statistics.
class Observer {
public:
    virtual ~Observer() = default;
    virtual void on_event(const SystemState& /*state*/, const Event& /*event*/) {}
    virtual void on_end(const SystemState& /*state*/) {}
};

struct RunLimits {
    std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max();
};

/**
 * Owns a state and its rate sampler (index 0 = leader with weight 1,
 * index i = gap i). Only the touched gaps are updated per event.
 */
class Simulator {
public:
    Simulator(SystemState state, JumpLaw law,
              std::uint64_t rebuild_period = WeightedSampler::kDefaultRebuildPeriod);

    const SystemState& state() const noexcept { return state_; }
    const JumpLaw& law() const noexcept { return law_; }
    const WeightedSampler& sampler() const noexcept { return sampler_; }
    std::uint64_t events() const noexcept { return events_; }

    /// Draws the holding time and applies the next event.
    Event step(Stream& rng);

    /// Applies the next event if it occurs no later than `horizon`; otherwise moves the
    /// clock to `horizon` and returns nullopt.
    std::optional<Event> step_within(double horizon, Stream& rng);

    /// Steps until the next event would pass t_end, then sets the clock to t_end.
    void run_until(double t_end, Stream& rng, std::span<Observer* const> observers = {},
                   RunLimits limits = {});

private:
    Event apply(double dt, Stream& rng);

    SystemState state_;
    JumpLaw law_;
    WeightedSampler sampler_;
    std::uint64_t events_ = 0;
};

/// One event from `state`; the pure-function form of Simulator::step.
std::pair<SystemState, Event> step(const SystemState& state, const JumpLaw& law, Stream& rng);

SystemState run_until(const SystemState& state, double t_end, const JumpLaw& law, Stream& rng,
                      std::span<Observer* const> observers = {}, RunLimits limits = {});

// ---------------------------------------------------------------------------
// Hitting time of the Lyapunov level set C = {V <= 4}, alpha = 1/10.

struct HittingTime {
    double tau = 0.0; // time of entry, or t_cap when censored
    bool censored = false;
    std::uint64_t events = 0;
};

HittingTime hitting_time_tauC(const SystemState& start, const JumpLaw& law, Stream& rng,
                              double t_cap);

// ---------------------------------------------------------------------------
// Trajectory logs. Columns in order: time, actor, size, gap_before.
// `actor` is 0 for the leader and the follower's gap label otherwise.
// Binary mode writes each column as a little-endian IEEE-754 float64.

enum class LogFormat { csv, binary };

class TrajectoryLog : public Observer {
public:
    TrajectoryLog(std::ostream& out, LogFormat format);
    void on_event(const SystemState& state, const Event& event) override;

    std::uint64_t records() const noexcept { return records_; }

private:
    std::ostream& out_;
    LogFormat format_;
    std::uint64_t records_ = 0;
};

/// Decodes a binary trajectory log.
std::vector<Event> read_binary_log(std::istream& in);

} // namespace ftl
