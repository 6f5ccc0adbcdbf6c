#include "ftl/errors.hpp"
#include "ftl/drivers.hpp"
#include "ftl/kernel.hpp"
#include "ftl/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace ftl;

namespace {

struct Recorder : Observer {
    std::vector<Event> events;
    int ends = 0;
    void on_event(const SystemState&, const Event& e) override { events.push_back(e); }
    void on_end(const SystemState&) override { ++ends; }
};

} // namespace

TEST_CASE("all-zero gaps: only the leader can move")
{
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Stream rng(seed);
        const auto [next, ev] = step(SystemState({0, 0, 0}), JumpLaw::exp_unit(), rng);
        REQUIRE(ev.actor.kind == ActorKind::leader);
        REQUIRE(next.gaps[0] == ev.size);
        REQUIRE(next.leader_pos == ev.size);
    }
}

TEST_CASE("n = 2, gap 3: leader share 1/4 and mean holding time 1/4")
{
    const int replicas = 100000;
    int leader = 0;
    std::vector<double> holds(replicas);
    for (int r = 0; r < replicas; ++r) {
        Stream rng = Stream::for_replica(11, r, StreamRole::simulation);
        const auto [next, ev] = step(SystemState({3.0}), JumpLaw::exp_unit(), rng);
        leader += ev.actor.kind == ActorKind::leader;
        holds[r] = ev.time;
    }
    const double p = double(leader) / replicas;
    CHECK(std::abs(p - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / replicas));
    const MeanVar mv = mean_var(holds);
    CHECK(std::abs(mv.mean - 0.25) <= 3.0 * mv.std_error());
}

TEST_CASE("run_until to the current clock is the identity")
{
    Stream rng(1);
    const SystemState s({1, 2, 3}, 5.0, 2.0);
    Recorder rec;
    Observer* obs[] = {&rec};
    const SystemState out = run_until(s, 2.0, JumpLaw::exp_unit(), rng, obs);
    CHECK(out.gaps == s.gaps);
    CHECK(out.leader_pos == s.leader_pos);
    CHECK(out.clock == 2.0);
    CHECK(rec.events.empty());
    CHECK(rec.ends == 1);
    CHECK_THROWS(run_until(s, 1.0, JumpLaw::exp_unit(), rng));
}

TEST_CASE("leader displacement averages to elapsed time")
{
    const double t_end = 3.0;
    std::vector<double> d(10000);
    for (std::size_t r = 0; r < d.size(); ++r) {
        Stream rng = Stream::for_replica(3, r, StreamRole::simulation);
        d[r] = run_until(SystemState({0.5, 0.5, 0.5}), t_end, JumpLaw::exp_unit(), rng).leader_pos;
    }
    const MeanVar mv = mean_var(d);
    CHECK(std::abs(mv.mean - t_end) <= 3.0 * mv.std_error());
}

TEST_CASE("same stream, same event log")
{
    auto run = [] {
        Stream rng(2718);
        Recorder rec;
        Observer* obs[] = {&rec};
        run_until(SystemState({1, 0, 2, 0.5}), 20.0, JumpLaw::pareto_unit_mean(2.5), rng, obs);
        return rec.events;
    };
    const auto a = run(), b = run();
    CHECK(!a.empty());
    CHECK(a == b);
}

TEST_CASE("per-event invariants")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Stream rng(seed);
        std::vector<double> y(15);
        for (auto& v : y) v = rng.exponential(0.5);
        Simulator sim(SystemState(y), JumpLaw::exp_unit(), 256);
        for (int k = 0; k < 20000; ++k) {
            const SystemState before = sim.state();
            const Event ev = sim.step(rng);
            const SystemState& after = sim.state();
            REQUIRE(after.leader_pos >= before.leader_pos);
            REQUIRE(after.clock >= before.clock);
            for (double g : after.gaps) REQUIRE(g >= 0.0);
            if (ev.actor.kind == ActorKind::leader) {
                REQUIRE(ev.size > 0.0);
                REQUIRE(after.gaps[0] == before.gaps[0] + ev.size);
            } else {
                const std::size_t i = ev.actor.gap - 1;
                REQUIRE(ev.size >= 0.0);
                REQUIRE(ev.size <= ev.gap_before);
                REQUIRE(ev.gap_before == before.gaps[i]);
                // The same u leaves one gap and enters the next.
                REQUIRE(after.gaps[i] == before.gaps[i] - ev.size);
                if (i + 1 < after.gaps.size()) {
                    REQUIRE(after.gaps[i + 1] == before.gaps[i + 1] + ev.size);
                    const double s0 = before.gaps[i] + before.gaps[i + 1];
                    const double s1 = after.gaps[i] + after.gaps[i + 1];
                    REQUIRE(std::abs(s1 - s0) <= 4.0 * std::ldexp(s0, -52));
                }
            }
            const double exact = total_rate(after);
            REQUIRE(std::abs(sim.sampler().total() - exact) <= 1e-9 * exact);
        }
    }
}

TEST_CASE("leader holding times are Exponential(1) from an all-zero start")
{
    Stream rng(606);
    Simulator sim(SystemState(std::vector<double>(7, 0.0)), JumpLaw::exp_unit());
    std::vector<double> holds;
    double last = 0.0;
    while (holds.size() < 10000) {
        const Event ev = sim.step(rng);
        if (ev.actor.kind != ActorKind::leader) continue;
        holds.push_back(ev.time - last);
        last = ev.time;
    }
    const auto ks = ks_test(holds, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });
    CHECK(ks.p > 0.01);
}

TEST_CASE("event cap raises horizon-exceeded")
{
    Stream rng(8);
    RunLimits limits{100};
    CHECK_THROWS_AS(run_until(SystemState({50, 50}), 1000.0, JumpLaw::exp_unit(), rng, {}, limits),
                    HorizonExceeded);
}

TEST_CASE("trajectory logs in both formats")
{
    std::ostringstream csv, bin;
    TrajectoryLog lc(csv, LogFormat::csv), lb(bin, LogFormat::binary);
    Recorder rec;
    Observer* obs[] = {&lc, &lb, &rec};
    Stream rng(5);
    run_until(SystemState({1, 1}), 5.0, JumpLaw::exp_unit(), rng, obs);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "time,actor,size,gap_before");
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == rec.events.size());
    CHECK(bin.str().size() == rec.events.size() * 32);
    std::istringstream in(bin.str());
    CHECK(read_binary_log(in) == rec.events);
}

TEST_CASE("hitting time of the Lyapunov level set")
{
    Stream rng(1);
    // V = 1 + 0.1 * 2 + 0.01 * 3 <= 4
    const auto inside = hitting_time_tauC(SystemState({2, 3}), JumpLaw::exp_unit(), rng, 10.0);
    CHECK(inside.tau == 0.0);
    CHECK(!inside.censored);

    std::vector<double> far(7, 0.0);
    far[0] = 1000.0;
    for (std::size_t r = 0; r < 1000; ++r) {
        Stream s = Stream::for_replica(9, r, StreamRole::simulation);
        const auto h = hitting_time_tauC(SystemState(far), JumpLaw::exp_unit(), s, 1000.0);
        REQUIRE(!h.censored);
        REQUIRE(h.tau > 0.0);
        REQUIRE(std::isfinite(h.tau));
    }

    Stream s(3);
    const auto capped = hitting_time_tauC(SystemState(far), JumpLaw::exp_unit(), s, 1e-9);
    CHECK(capped.censored);
    CHECK(capped.tau == 1e-9);
}

TEST_CASE("hitting-time survival from a spread start has an exponential-type tail")
{
    const std::vector<double> start(7, 100.0);
    const auto hits = hitting_times(start, JumpLaw::exp_unit(), 1000.0, 10000, 31);
    std::vector<double> tau;
    for (const auto& h : hits) {
        REQUIRE(!h.censored);
        tau.push_back(h.tau);
    }
    // Entry into C is fast, so the survival is already 0 at t = 2, 4, 8.
    for (const auto& s : survival(tau, {2.0, 4.0, 8.0})) CHECK(s.p_hat == 0.0);

    // On the time scale of the median the log-survival falls at least linearly:
    // successive slopes over q, 2q, 4q do not flatten.
    std::vector<double> sorted = tau;
    std::sort(sorted.begin(), sorted.end());
    const double q = sorted[sorted.size() / 2];
    const auto s = survival(tau, {q, 2 * q, 4 * q});
    REQUIRE(s[2].p_hat > 0.0);
    CHECK(s[1].p_hat < s[0].p_hat);
    CHECK(s[2].p_hat < s[1].p_hat);
    const double slope1 = (std::log(s[1].p_hat) - std::log(s[0].p_hat)) / q;
    const double slope2 = (std::log(s[2].p_hat) - std::log(s[1].p_hat)) / (2 * q);
    CHECK(slope1 < 0.0);
    // Delta method: Var(log p_hat) ~ (1 - p) / (N p).
    auto lv = [&](const TailEstimate& e) { return (1.0 - e.p_hat) / (double(tau.size()) * e.p_hat); };
    const double se = std::sqrt(lv(s[2]) / (4 * q * q) + lv(s[1]) * (2.25 / (q * q)) + lv(s[0]) / (q * q));
    CHECK(slope2 <= slope1 + 3.0 * se);
}
