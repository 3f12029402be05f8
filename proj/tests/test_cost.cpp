#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stagemap/cost.hpp"
#include "stagemap/errors.hpp"
#include "test_support.hpp"

using namespace stagemap;

namespace {

std::shared_ptr<const NetworkSpec> small_net() {
    auto net = std::make_shared<NetworkSpec>();
    net->name = "n";
    net->base_accuracy = 0.9;
    net->layers.push_back({8, std::vector<double>(8, 1.0), 64, 2.0});
    net->layers.push_back({8, std::vector<double>(8, 1.0), 64, 1.0});
    return net;
}

std::shared_ptr<const PlatformSpec> small_plat() {
    auto plat = std::make_shared<PlatformSpec>();
    plat->shared_memory_bytes = 1 << 20;
    plat->units.push_back({"fast", 1.0, 2.0, {0.25, 0.5, 0.75, 1.0}, 2.0});
    plat->units.push_back({"slow", 10.0, 20.0, {0.5, 1.0}, 1.0});
    plat->transfer = {{{1e12, 0.0}, {1e9, 1e-4}}, {{1e9, 1e-4}, {1e12, 0.0}}};
    return plat;
}

} // namespace

TEST_CASE("analytic latency follows work / (speed * scale)") {
    AnalyticCostProvider costs(small_net(), small_plat());
    // work 2.0 per channel, 4 channels, speed 2.0, scale 1.0 -> 4.0
    CHECK(costs.sublayer_latency({0, 4, 0, 1.0}) == doctest::Approx(4.0));
    CHECK(costs.sublayer_latency({0, 0, 0, 1.0}) == 0.0);
    CHECK(costs.sublayer_latency({0, 4, 0, 0.5}) == doctest::Approx(8.0));

    SUBCASE("strictly decreasing in the scale, linear in channels") {
        for (int c = 1; c <= 8; ++c) {
            const double at_quarter = costs.sublayer_latency({1, c, 0, 0.25});
            const double at_half = costs.sublayer_latency({1, c, 0, 0.5});
            const double at_full = costs.sublayer_latency({1, c, 0, 1.0});
            CHECK(at_quarter > at_half);
            CHECK(at_half > at_full);
            CHECK(costs.sublayer_latency({1, c, 0, 1.0}) ==
                  doctest::Approx(c * costs.sublayer_latency({1, 1, 0, 1.0})));
        }
    }
    SUBCASE("scale must be a real level") {
        CHECK_THROWS_AS(costs.sublayer_latency({0, 4, 0, 0.3}), validation_error);
    }
    SUBCASE("indices are range-checked") {
        CHECK_THROWS_AS(costs.sublayer_latency({9, 4, 0, 1.0}), validation_error);
        CHECK_THROWS_AS(costs.sublayer_latency({0, 4, 5, 1.0}), validation_error);
        CHECK_THROWS_AS(costs.sublayer_latency({0, -1, 0, 1.0}), validation_error);
    }
}

TEST_CASE("transfer cost is zero locally and affine across units") {
    const auto plat = small_plat();
    CHECK(transfer_cost(*plat, 123456, 0, 0) == 0.0);
    CHECK(transfer_cost(*plat, 1000000, 0, 1) == doctest::Approx(1.1e-3));
    CHECK(transfer_cost(*plat, 0, 0, 1) == doctest::Approx(1e-4));

    SUBCASE("affinity: cost(a+b) == cost(a) + cost(b) - fixed") {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const std::int64_t a = static_cast<std::int64_t>(rng.below(1 << 20));
            const std::int64_t b = static_cast<std::int64_t>(rng.below(1 << 20));
            const double lhs = transfer_cost(*plat, a + b, 0, 1);
            const double rhs = transfer_cost(*plat, a, 0, 1) + transfer_cost(*plat, b, 0, 1) -
                               plat->transfer[0][1].fixed_latency_sec;
            CHECK(testsup::rel_close(lhs, rhs, 1e-12));
        }
    }
}

TEST_CASE("power is affine in the scale") {
    ComputeUnit cu{"x", 1.0, 2.0, {0.5, 1.0}, 1.0};
    CHECK(power(cu, 0.5) == doctest::Approx(2.0));

    ComputeUnit flat{"y", 3.5, 0.0, {0.25, 0.5, 1.0}, 1.0};
    for (double lv : flat.dvfs_levels) CHECK(power(flat, lv) == doctest::Approx(3.5));

    ComputeUnit big{"z", 10.0, 20.0, {0.5, 1.0}, 1.0};
    CHECK(power(big, 1.0) == doctest::Approx(30.0));

    SUBCASE("two-point slope recovers beta on every unit") {
        const auto plat = small_plat();
        for (const ComputeUnit& unit : plat->units) {
            if (unit.dvfs_levels.size() < 2) continue;
            const double lo = unit.dvfs_levels.front();
            const double hi = unit.dvfs_levels.back();
            const double slope = (power(unit, hi) - power(unit, lo)) / (hi - lo);
            CHECK(testsup::rel_close(slope, unit.beta, 1e-9));
        }
    }
    SUBCASE("scale outside the level set is rejected") {
        CHECK_THROWS_AS(power(cu, 0.75), validation_error);
    }
}

TEST_CASE("cost table CSV parsing") {
    const std::string good = "layer,channels,unit,dvfs,latency_s\n"
                             "0,2,fast,1.0,0.003\n"
                             "0,4,fast,1.0,0.005\n"
                             "1,2,slow,0.5,0.004\n"
                             "1,4,slow,0.5,0.008\n";
    const CostTable table = cost_table_from_csv(good);
    CHECK(table.records.size() == 4);
    CHECK(cost_table_from_csv(cost_table_to_csv(table)) == table);

    SUBCASE("duplicate keys are rejected") {
        CHECK_THROWS_WITH_AS(cost_table_from_csv("layer,channels,unit,dvfs,latency_s\n"
                                                 "0,2,fast,1.0,0.003\n"
                                                 "0,2,fast,1.0,0.004\n"),
                             doctest::Contains("duplicate"), validation_error);
    }
    SUBCASE("non-positive latency is rejected") {
        CHECK_THROWS_AS(cost_table_from_csv("layer,channels,unit,dvfs,latency_s\n"
                                            "0,2,fast,1.0,-1\n"),
                        validation_error);
        CHECK_THROWS_AS(cost_table_from_csv("layer,channels,unit,dvfs,latency_s\n"
                                            "0,2,fast,1.0,0\n"),
                        validation_error);
    }
    SUBCASE("wrong header is rejected") {
        CHECK_THROWS_AS(cost_table_from_csv("layer,chan,unit,dvfs,latency\n0,2,fast,1.0,1\n"),
                        parse_error);
    }
    SUBCASE("unknown unit id fails at provider construction") {
        CHECK_THROWS_AS(TableCostProvider(cost_table_from_csv(
                            "layer,channels,unit,dvfs,latency_s\n0,2,nope,1.0,0.5\n"),
                                          small_net(), small_plat()),
                        validation_error);
    }
}

TEST_CASE("table provider reproduces records and interpolates between them") {
    const std::string csv = "layer,channels,unit,dvfs,latency_s\n"
                            "0,2,fast,1.0,0.003\n"
                            "0,4,fast,1.0,0.005\n"
                            "0,2,fast,0.5,0.006\n"
                            "0,4,fast,0.5,0.010\n";
    TableCostProvider costs(cost_table_from_csv(csv), small_net(), small_plat());

    SUBCASE("tabulated keys come back exactly") {
        CHECK(costs.sublayer_latency({0, 2, 0, 1.0}) == 0.003);
        CHECK(costs.sublayer_latency({0, 4, 0, 0.5}) == 0.010);
    }
    SUBCASE("linear interpolation on the channel axis") {
        CHECK(costs.sublayer_latency({0, 3, 0, 1.0}) == doctest::Approx(0.004));
    }
    SUBCASE("bilinear interpolation on both axes") {
        // 0.75 is a real level of the unit but not tabulated: midpoint of the
        // 2x2 grid cell above.
        CHECK(costs.sublayer_latency({0, 3, 0, 0.75}) ==
              doctest::Approx((0.003 + 0.005 + 0.006 + 0.010) / 4.0));
    }
    SUBCASE("zero channels never hit the table") {
        CHECK(costs.sublayer_latency({0, 0, 0, 1.0}) == 0.0);
    }
    SUBCASE("outside the hull is an extrapolation error") {
        CHECK_THROWS_WITH_AS(costs.sublayer_latency({0, 5, 0, 1.0}),
                             doctest::Contains("outside"), validation_error);
        CHECK_THROWS_AS(costs.sublayer_latency({0, 1, 0, 1.0}), validation_error);
        CHECK_THROWS_AS(costs.sublayer_latency({1, 2, 0, 1.0}), validation_error);
    }
}
