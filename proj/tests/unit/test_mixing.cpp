#include "ftl/mixing.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace ftl;

TEST_CASE("lower estimate at t = 0 is the plug-in bound")
{
    for (std::size_t n : {4, 16, 33})
        for (double delta : {0.9, 0.5}) {
            const auto m = tmix_lower_estimate(n, delta, {0.0, 1.0}, 20, 1);
            const double mean = (1.0 - delta) * double(n - 1);
            CHECK(m.phi_mean[0] == doctest::Approx(mean).epsilon(1e-13));
            CHECK(m.phi_var[0] == doctest::Approx(0.0));
            // r^2 = (delta (n - 1))^2 / ((n - 1) / 2) = 2 delta^2 (n - 1)
            const double expect = 1.0 - 4.0 / (4.0 + 2.0 * delta * delta * double(n - 1));
            CHECK(m.lower_bounds[0] == doctest::Approx(expect).epsilon(1e-12));
        }
    const auto zero = tmix_lower_estimate(8, 0.0, {0.0}, 10, 1);
    CHECK(zero.lower_bounds[0] == 0.0);
    CHECK_THROWS(tmix_lower_estimate(8, 1.0, {0.0}, 10, 1));
}

TEST_CASE("coupling tail from zeros is 1 at t = 0 and nonincreasing")
{
    const auto t0 = coupling_tail(8, InitKind::zeros(), 0.0, 200, 3);
    CHECK(t0.p_hat == 1.0);
    CHECK_THROWS(coupling_tail(8, InitKind::zeros(), 0.0, 99, 3));

    const auto grid = geometric_grid(0.5, 64.0, 2.0);
    const auto tails = coupling_tails(8, InitKind::spread(10.0), grid, 1000, 4);
    for (std::size_t g = 1; g < tails.size(); ++g) {
        CHECK(tails[g].p_hat <= tails[g - 1].p_hat);
        CHECK(tails[g].ci_low <= tails[g - 1].ci_high);
    }
}

TEST_CASE("upper estimate for n = 4 resolves quickly")
{
    std::vector<double> grid;
    for (int t = 1; t <= 64; ++t) grid.push_back(t);
    const auto start = std::chrono::steady_clock::now();
    const auto m = tmix_upper_estimate(4, grid, 1000, 9);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(m.upper_resolved);
    REQUIRE(m.t_mix_upper);
    CHECK(*m.t_mix_upper <= 64.0);
    CHECK(secs < 60.0);
}

TEST_CASE("doubling replicas shrinks the interval width by about 1/sqrt(2)")
{
    const std::vector<double> t{6.0};
    const auto a = coupling_tails(8, InitKind::zeros(), t, 4000, 21).front();
    const auto b = coupling_tails(8, InitKind::zeros(), t, 8000, 21).front();
    REQUIRE(a.p_hat > 0.1);
    REQUIRE(a.p_hat < 0.9);
    const double ratio = (b.ci_high - b.ci_low) / (a.ci_high - a.ci_low);
    CHECK(std::abs(ratio - 1.0 / std::sqrt(2.0)) <= 0.2 / std::sqrt(2.0));
}

TEST_CASE("lower and upper sides are merged and checked for consistency")
{
    MixingEstimate lower;
    lower.n = 4;
    lower.t_grid = {1, 2, 3};
    lower.phi_mean = {0.3, 2.9, 3.0};
    lower.phi_var = {0.0, 3.0, 3.0};
    resolve_lower(lower);
    REQUIRE(lower.t_mix_lower);
    CHECK(*lower.t_mix_lower == 1.0);
    CHECK(lower.lower_resolved);

    MixingEstimate upper;
    upper.t_mix_upper = 0.5;
    upper.upper_resolved = true;
    merge_upper(lower, upper);
    CHECK(lower.inconsistent);
    upper.t_mix_upper = 2.0;
    merge_upper(lower, upper);
    CHECK(!lower.inconsistent);
}

TEST_CASE("geometric grids")
{
    const auto g = geometric_grid(1.0, 8.0, 2.0);
    CHECK(g == std::vector<double>{1, 2, 4, 8});
    CHECK(geometric_grid(1.0, 5.0, 2.0).back() == 8.0);
    CHECK_THROWS(geometric_grid(0.0, 1.0, 2.0));
}
