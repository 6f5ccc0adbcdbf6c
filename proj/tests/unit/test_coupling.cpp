#include "ftl/coupling.hpp"
#include "ftl/drivers.hpp"
#include "ftl/frozen.hpp"
#include "ftl/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace ftl;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    return true;
}

} // namespace

TEST_CASE("pair weight is max of the two gaps and the leader weighs 1")
{
    const auto cs = CoupledState::make({1, 0}, {3, 0});
    CoupledSimulator sim(cs, JumpLaw::exp_unit());
    CHECK(sim.sampler().weight(0) == 1.0);
    CHECK(sim.sampler().weight(1) == 3.0); // m + n = 1 + 2
    CHECK(sim.sampler().weight(2) == 0.0);
    CHECK(sim.sampler().total() == 4.0);

    // Frequency oracle for P(pair 1 selected) = 3/4.
    const int draws = 1000000;
    int pair = 0;
    Stream rng(44);
    for (int k = 0; k < draws; ++k) pair += coupled_step(cs, JumpLaw::exp_unit(), rng).second.gap == 1;
    const double p = double(pair) / draws;
    CHECK(std::abs(p - 0.75) <= 3.0 * std::sqrt(0.75 * 0.25 / draws));
}

TEST_CASE("faster-only jumps take n / (m + n) of the pair events")
{
    const auto cs = CoupledState::make({3}, {1});
    Stream rng(12);
    int pair_events = 0, faster = 0;
    for (int k = 0; k < 400000; ++k) {
        const auto ev = coupled_step(cs, JumpLaw::exp_unit(), rng).second;
        if (ev.kind == CoupledKind::leader) continue;
        ++pair_events;
        faster += ev.kind == CoupledKind::faster_only;
    }
    const double p = double(faster) / pair_events;
    CHECK(std::abs(p - 2.0 / 3.0) <= 3.0 * std::sqrt(2.0 / 9.0 / pair_events));
}

TEST_CASE("coalesced systems stay bit-equal")
{
    Stream rng(1);
    CoupledSimulator sim(CoupledState::make({1, 2, 0.5}, {1, 2, 0.5}), JumpLaw::exp_unit());
    CHECK(sim.state().fully_coalesced());
    for (int k = 0; k < 10000; ++k) {
        const auto ev = sim.step(rng);
        REQUIRE(ev.kind != CoupledKind::faster_only);
        REQUIRE(bit_equal(sim.state().gaps_a, sim.state().gaps_b));
    }
}

TEST_CASE("identical inputs couple at time 0")
{
    Stream rng(1);
    const auto out = run_coupling({1, 2}, {1, 2}, JumpLaw::exp_unit(), 10.0, rng);
    REQUIRE(out.tau);
    CHECK(*out.tau == 0.0);
    CHECK_THROWS(run_coupling({1}, {1, 2}, JumpLaw::exp_unit(), 10.0, rng));
}

TEST_CASE("coupling survival is strictly decreasing for n = 2, (0) against (5)")
{
    std::vector<double> taus;
    for (std::size_t r = 0; r < 10000; ++r) {
        Stream rng = Stream::for_replica(5, r, StreamRole::simulation);
        const auto out = run_coupling({0.0}, {5.0}, JumpLaw::exp_unit(), 100.0, rng);
        taus.push_back(out.tau ? *out.tau : INFINITY);
    }
    const auto tails = survival(taus, {0.05, 0.1, 0.2, 0.4, 0.8, 1.6});
    CHECK(tails.front().p_hat > 0.0);
    for (std::size_t g = 1; g < tails.size(); ++g) CHECK(tails[g].p_hat < tails[g - 1].p_hat);
}

TEST_CASE("coupled invariants along trajectories")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Stream rng(seed);
        std::vector<double> a(9), b(9);
        for (auto& v : a) v = rng.exponential(1.0);
        for (auto& v : b) v = rng.exponential(0.3);
        CoupledSimulator sim(CoupledState::make(a, b), JumpLaw::exp_unit());
        std::size_t prefix = 0;
        bool done = false;
        for (int k = 0; k < 50000; ++k) {
            const auto before = sim.state();
            const auto ev = sim.step(rng);
            const auto& s = sim.state();
            if (ev.kind == CoupledKind::faster_only) {
                const std::size_t i = ev.gap - 1;
                const double d0 = before.gaps_a[i] - before.gaps_b[i];
                const double d1 = s.gaps_a[i] - s.gaps_b[i];
                REQUIRE(ev.faster_kept_lead);
                REQUIRE((d0 > 0) == (d1 > 0));
                REQUIRE((d0 < 0) == (d1 < 0));
            }
            for (double v : s.gaps_a) REQUIRE(v >= 0.0);
            for (double v : s.gaps_b) REQUIRE(v >= 0.0);
            REQUIRE(s.coalesced_prefix >= prefix);
            prefix = s.coalesced_prefix;
            for (std::size_t i = 0; i < prefix; ++i)
                REQUIRE(std::bit_cast<std::uint64_t>(s.gaps_a[i]) ==
                        std::bit_cast<std::uint64_t>(s.gaps_b[i]));
            if (done) REQUIRE(bit_equal(s.gaps_a, s.gaps_b));
            done = done || s.fully_coalesced();
            const double exact = 1.0 + [&] {
                double t = 0;
                for (std::size_t i = 0; i < s.gaps_a.size(); ++i) t += std::max(s.gaps_a[i], s.gaps_b[i]);
                return t;
            }();
            REQUIRE(std::abs(sim.sampler().total() - exact) <= 1e-9 * exact);
        }
    }
}

TEST_CASE("contraction of the l1 distance in expectation")
{
    const std::vector<double> ya{0, 0, 0, 0, 0}, yb{2, 0.5, 3, 1, 0.2};
    double d0 = 0;
    for (std::size_t i = 0; i < ya.size(); ++i) d0 += std::abs(ya[i] - yb[i]);
    const std::vector<double> times{1, 5, 10};
    std::vector<std::vector<double>> dist(times.size(), std::vector<double>(10000));
    for (std::size_t r = 0; r < 10000; ++r) {
        Stream rng = Stream::for_replica(17, r, StreamRole::simulation);
        CoupledSimulator sim(CoupledState::make(ya, yb), JumpLaw::exp_unit());
        for (std::size_t g = 0; g < times.size(); ++g) {
            sim.run_until(times[g], rng);
            double d = 0;
            for (std::size_t i = 0; i < ya.size(); ++i)
                d += std::abs(sim.state().gaps_a[i] - sim.state().gaps_b[i]);
            dist[g][r] = d;
        }
    }
    double prev = d0, prev_se = 0.0;
    for (const auto& col : dist) {
        const MeanVar mv = mean_var(col);
        CHECK(mv.mean <= prev + 3.0 * std::hypot(mv.std_error(), prev_se));
        prev = mv.mean;
        prev_se = mv.std_error();
    }
}

TEST_CASE("coupled marginal matches an independent run")
{
    const std::size_t n = 4, replicas = 10000;
    std::vector<std::vector<double>> coupled(n - 1, std::vector<double>(replicas));
    for (std::size_t r = 0; r < replicas; ++r) {
        Stream partner = Stream::for_replica(8, r, StreamRole::partner);
        Stream rng = Stream::for_replica(8, r, StreamRole::probe);
        CoupledSimulator sim(CoupledState::make(std::vector<double>(n - 1, 0.0),
                                                sample_stationary_gaps(n, 1.0, partner)),
                             JumpLaw::exp_unit());
        sim.run_until(5.0, rng);
        for (std::size_t i = 0; i + 1 < n; ++i) coupled[i][r] = sim.state().gaps_a[i];
    }
    const auto plain = gap_snapshots(n, StartSpec::fixed(std::vector<double>(n - 1, 0.0)),
                                     JumpLaw::exp_unit(), {5.0}, replicas, 8)
                           .front();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::vector<double> ind(replicas);
        for (std::size_t r = 0; r < replicas; ++r) ind[r] = plain[r].gaps[i];
        CHECK(ks_two_sample(coupled[i], ind).p > 0.01 / (n - 1));
    }
}

TEST_CASE("stationary gap sampler")
{
    Stream rng(3);
    CHECK(sample_stationary_gaps(2, 1.0, rng).size() == 1);
    CHECK_THROWS(sample_stationary_gaps(2, 0.0, rng));
    std::vector<double> one, two;
    for (int k = 0; k < 100000; ++k) one.push_back(sample_stationary_gaps(2, 1.0, rng)[0]);
    for (int k = 0; k < 10000; ++k) two.push_back(sample_stationary_gaps(2, 2.0, rng)[0]);
    const MeanVar mv = mean_var(one);
    CHECK(std::abs(mv.mean - 1.0) <= 3.0 * mv.std_error());
    CHECK(ks_test(two, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-2.0 * x); }).p > 0.01);
}

TEST_CASE("dominance of the frozen-boundaries process")
{
    Stream rng(1);
    CHECK(dominance_run(8, 0.0, rng, LeaderPath::frozen).ok);
    CHECK(dominance_run(8, 0.0, rng, LeaderPath::exp_jumps).ok);
    for (auto path : {LeaderPath::frozen, LeaderPath::exp_jumps})
        for (const auto& r : dominance_runs(8, 50.0, path, 100, 2)) REQUIRE(r.ok);
    CHECK_THROWS(dominance_run(2, 1.0, rng, LeaderPath::frozen));
    CHECK_THROWS(validate_s0({0.5, 0.2, 0.0}));
    CHECK_THROWS(validate_s0({1.0, 0.2, 0.1}));
    CHECK_NOTHROW(validate_s0({2.0, 1.5, 0.0}));
    CHECK(dominance_run(5, 20.0, rng, LeaderPath::exp_jumps, {3.0, 2.0, 2.0, 1.0, 0.0}).ok);
}

TEST_CASE("thinning Z agrees in law with the direct frozen simulator")
{
    const std::size_t m = 8, replicas = 10000;
    const double t = 5.0;
    std::vector<double> thin(replicas), direct(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
        Stream a = Stream::for_replica(23, r, StreamRole::simulation);
        thin[r] = dominance_run(m, t, a, LeaderPath::frozen).z[m - 2];
        Stream b = Stream::for_replica(23, r, StreamRole::probe);
        FrozenSimulator sim(FrozenState::initial(m));
        while (sim.step_within(t, b) != 0) {
        }
        direct[r] = sim.state().z[m - 2];
    }
    const MeanVar a = mean_var(thin), b = mean_var(direct);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error(), b.std_error()));
}
