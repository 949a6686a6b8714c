#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "aoisim/scenario.hpp"
#include "test_util.hpp"

using namespace aoisim;

TEST_CASE("toy scenario demand rows") {
    const Scenario sc = buildScenario(test::toyConfig());
    const std::vector<int> expected{2, 2, 2, 3, 2};
    for (int i = 0; i < 5; ++i) CHECK(sc.demand.rowCount(i) == expected[static_cast<std::size_t>(i)]);
}

TEST_CASE("empty demand row is rejected") {
    auto cfg = test::toyConfig();
    cfg.demandRows[2] = {0, 0, 0, 0};
    CHECK_THROWS_WITH(buildScenario(cfg), Catch::Matchers::ContainsSubstring("empty demand"));
}

TEST_CASE("invariant violations are named") {
    auto cfg = test::toyConfig();
    cfg.delta1 = 1.5;
    CHECK_THROWS_WITH(buildScenario(cfg), Catch::Matchers::ContainsSubstring("delta1"));
    cfg = test::toyConfig();
    cfg.epsilonMax = 1.0;
    CHECK_THROWS_WITH(buildScenario(cfg), Catch::Matchers::ContainsSubstring("epsilonMax"));
}

TEST_CASE("same seed reproduces speeds and positions") {
    const Scenario a = buildScenario(test::toyConfig(7));
    const Scenario b = buildScenario(test::toyConfig(7));
    CHECK(a.vehicleSpeed == b.vehicleSpeed);
    for (int i = 0; i < a.V; ++i) {
        CHECK(a.vehicleInit[static_cast<std::size_t>(i)].x == b.vehicleInit[static_cast<std::size_t>(i)].x);
        CHECK(a.vehicleInit[static_cast<std::size_t>(i)].y == b.vehicleInit[static_cast<std::size_t>(i)].y);
    }
}

TEST_CASE("straight-road mobility") {
    auto cfg = test::toyConfig();
    cfg.initX = {0.0, -50.0, 10.0, 20.0, 30.0};
    cfg.speeds = {10.0, 15.0, 12.0, 11.0, 13.0};
    const Scenario sc = buildScenario(cfg);
    CHECK(advanceMobility(sc, 3)[0].x == Catch::Approx(20.0));
    CHECK(advanceMobility(sc, 7)[1].x == Catch::Approx(40.0));
    // t = 1 leaves initial positions untouched
    const auto p1 = advanceMobility(sc, 1);
    for (int i = 0; i < sc.V; ++i)
        CHECK(p1[static_cast<std::size_t>(i)].x == sc.vehicleInit[static_cast<std::size_t>(i)].x);
}

TEST_CASE("steering vector values") {
    const auto a0 = steeringVector(0.0, 4);
    for (const auto& z : a0) CHECK(std::abs(z - cplx{1.0, 0.0}) < 1e-15);

    const auto a1 = steeringVector(std::numbers::pi / 2, 2);
    CHECK(std::abs(a1[0] - cplx{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(a1[1] - cplx{-1.0, 0.0}) < 1e-12);

    const auto a2 = steeringVector(std::numbers::pi / 6, 3);
    CHECK(std::abs(a2[0] - cplx{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(a2[1] - cplx{0.0, 1.0}) < 1e-12);
    CHECK(std::abs(a2[2] - cplx{-1.0, 0.0}) < 1e-12);
}

TEST_CASE("steering entries are unit modulus", "[property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dphi(-std::numbers::pi, std::numbers::pi);
    std::uniform_int_distribution<int> dn(1, 256);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = steeringVector(dphi(rng), dn(rng));
        for (const auto& z : a) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
    }
}

TEST_CASE("channel vector magnitudes and inverse-square law") {
    auto cfg = test::toyConfig();
    cfg.initX = {0.0, 30.0, 60.0, 90.0, 120.0};
    cfg.speeds = {10.0, 11.0, 12.0, 13.0, 14.0};
    const Scenario sc = buildScenario(cfg);
    const auto cs = channelState(sc, 1);
    for (int i = 0; i < sc.V; ++i) {
        const auto& vc = cs.vehicles[static_cast<std::size_t>(i)];
        double lo = 1e300, hi = 0.0, pw = 0.0;
        for (const auto& z : vc.h) {
            lo = std::min(lo, std::abs(z));
            hi = std::max(hi, std::abs(z));
            pw += std::norm(z);
        }
        CHECK(hi - lo < 1e-15);  // equal-magnitude entries
        CHECK(pw == Catch::Approx(sc.N * vc.largeScaleGain).epsilon(1e-12));
        CHECK(vc.angle >= 0.0);
        CHECK(vc.angle <= std::numbers::pi);
    }

    // doubling distance quarters per-entry power
    auto far = cfg;
    far.laneOffset = 20.0;
    far.initX = {0.0, 60.0, 120.0, 180.0, 240.0};
    const Scenario sc2 = buildScenario(far);
    const auto cs2 = channelState(sc2, 1);
    for (int i = 0; i < sc.V; ++i) {
        const double r = std::norm(cs2.vehicles[static_cast<std::size_t>(i)].h[0]) /
                         std::norm(cs.vehicles[static_cast<std::size_t>(i)].h[0]);
        CHECK(r == Catch::Approx(0.25).epsilon(1e-9));
    }
}

TEST_CASE("large-scale gain matches direct arithmetic") {
    // chi = c0 / (4*pi*fc*ell^2) at fc = 3 GHz, ell = 100 m
    auto cfg = test::toyConfig();
    cfg.initX = {0.0, 1.0, 2.0, 3.0, 4.0};
    cfg.laneOffset = 100.0;
    cfg.fc = 3e9;
    cfg.c0 = 2.99e8;
    const Scenario sc = buildScenario(cfg);
    const auto cs = channelState(sc, 1);
    const double expected = 2.99e8 / (4.0 * std::numbers::pi * 3e9 * 1e4);
    CHECK(cs.vehicles[0].largeScaleGain == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("channel generation is deterministic per seed", "[property]") {
    const Scenario a = buildScenario(test::toyConfig(99));
    const Scenario b = buildScenario(test::toyConfig(99));
    const auto ca = simulateChannels(a);
    const auto cb = simulateChannels(b);
    for (int t = 0; t < a.T; ++t)
        for (int i = 0; i < a.V; ++i)
            CHECK(ca[static_cast<std::size_t>(t)].vehicles[static_cast<std::size_t>(i)].h ==
                  cb[static_cast<std::size_t>(t)].vehicles[static_cast<std::size_t>(i)].h);
}

TEST_CASE("collocated vehicle is an error") {
    auto cfg = test::toyConfig();
    cfg.initX = {0.0, 1.0, 2.0, 3.0, 4.0};
    cfg.laneOffset = 0.0;
    const Scenario sc = buildScenario(cfg);
    CHECK_THROWS_AS(channelState(sc, 1), std::domain_error);
}
