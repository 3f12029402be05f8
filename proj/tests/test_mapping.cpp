#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "stagemap/errors.hpp"
#include "stagemap/mapping.hpp"
#include "test_support.hpp"

using namespace stagemap;

namespace {

// Independent rounding oracle: enumerate every integer split of `width` into
// the right number of parts, minimize the total absolute deviation from the
// fractional targets, and break ties by the lexicographically greatest split
// (extra channels land on the earliest stages).
std::vector<int> split_oracle(const std::vector<double>& fractions, int width) {
    const int m = static_cast<int>(fractions.size());
    std::vector<int> current(m, 0), best;
    double best_dev = 0.0;
    std::function<void(int, int)> rec = [&](int stage, int left) {
        if (stage == m - 1) {
            current[stage] = left;
            double dev = 0.0;
            for (int i = 0; i < m; ++i) dev += std::fabs(current[i] - fractions[i] * width);
            if (best.empty() || dev < best_dev - 1e-12 ||
                (std::fabs(dev - best_dev) <= 1e-12 && current > best)) {
                best = current;
                best_dev = dev;
            }
            return;
        }
        for (int c = 0; c <= left; ++c) {
            current[stage] = c;
            rec(stage + 1, left - c);
        }
    };
    rec(0, width);
    return best;
}

MappingConfig valid_config_3x2() {
    MappingConfig c;
    c.partition = {{0.5, 0.25}, {0.25, 0.25}, {0.25, 0.5}};
    c.indicator = {{1, 0}, {0, 1}, {0, 0}};
    c.mapping = {0, 1, 2};
    c.dvfs = {0, 0, 0};
    return c;
}

NetworkSpec net_3x2() {
    NetworkSpec net;
    net.name = "n";
    net.base_accuracy = 0.9;
    net.layers.push_back({8, {8, 7, 6, 5, 4, 3, 2, 1}, 100, 1.0});
    net.layers.push_back({4, {1, 2, 3, 4}, 200, 1.0});
    return net;
}

PlatformSpec plat_3() {
    PlatformSpec plat;
    plat.shared_memory_bytes = 1 << 20;
    for (int u = 0; u < 3; ++u)
        plat.units.push_back({"u" + std::to_string(u), 1.0, 1.0, {0.5, 1.0}, 1.0});
    plat.transfer.assign(3, std::vector<TransferLink>(3, {1e9, 1e-4}));
    for (int u = 0; u < 3; ++u) plat.transfer[u][u] = {1e12, 0.0};
    return plat;
}

} // namespace

TEST_CASE("validate accepts a well-formed config") {
    const auto net = net_3x2();
    const auto plat = plat_3();
    CHECK(validate(valid_config_3x2(), net, plat, RatioSet::eighths()).ok());
}

TEST_CASE("validate reports each violated invariant") {
    const auto net = net_3x2();
    const auto plat = plat_3();

    SUBCASE("duplicate unit in mapping") {
        auto c = valid_config_3x2();
        c.mapping = {0, 0, 1};
        const auto report = validate(c, net, plat, RatioSet::eighths());
        REQUIRE(!report.ok());
        CHECK(report.violations[0].find("duplicate unit 0") != std::string::npos);
    }
    SUBCASE("column sum below one") {
        auto c = valid_config_3x2();
        c.partition[0][1] = 0.125; // 0.125 + 0.25 + 0.5 != 1
        const auto report = validate(c, net, plat, RatioSet::eighths());
        REQUIRE(!report.ok());
        CHECK(report.violations[0].find("layer 1 coverage != 1") != std::string::npos);
    }
    SUBCASE("ratio outside the configured set") {
        auto c = valid_config_3x2();
        c.partition[0][0] = 0.3;
        c.partition[1][0] = 0.45;
        const auto report = validate(c, net, plat, RatioSet::eighths());
        CHECK(!report.ok());
    }
    SUBCASE("stale last-stage indicator") {
        auto c = valid_config_3x2();
        c.indicator[2][0] = 1;
        const auto report = validate(c, net, plat, RatioSet::eighths());
        REQUIRE(!report.ok());
        CHECK(report.violations[0].find("last-stage") != std::string::npos);
    }
    SUBCASE("dvfs index out of range") {
        auto c = valid_config_3x2();
        c.dvfs[1] = 7;
        CHECK(!validate(c, net, plat, RatioSet::eighths()).ok());
    }
    SUBCASE("dimension mismatch is an error, not a report entry") {
        auto c = valid_config_3x2();
        c.partition.pop_back();
        CHECK_THROWS_AS(validate(c, net, plat, RatioSet::eighths()), validation_error);
    }
}

TEST_CASE("rank_channels sorts by importance with index tie-break") {
    Layer l;
    l.width = 3;
    l.channel_importance = {0.1, 0.9, 0.5};
    CHECK(rank_channels(l) == std::vector<int>{1, 2, 0});

    l.width = 2;
    l.channel_importance = {0.4, 0.4};
    CHECK(rank_channels(l) == std::vector<int>{0, 1});

    l.width = 4;
    l.channel_importance = {1.0, 1.0, 1.0, 1.0};
    CHECK(rank_channels(l) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("rank_channels always returns a permutation") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Layer l;
        l.width = 1 + static_cast<int>(rng.below(16));
        for (int c = 0; c < l.width; ++c)
            l.channel_importance.push_back(rng.below(4) / 4.0); // plenty of ties
        auto perm = rank_channels(l);
        std::sort(perm.begin(), perm.end());
        for (int c = 0; c < l.width; ++c) CHECK(perm[c] == c);
    }
}

TEST_CASE("split_counts matches the hand examples and the enumeration oracle") {
    CHECK(split_counts({0.25, 0.375, 0.375}, 8) == std::vector<int>{2, 3, 3});
    CHECK(split_counts({1.0 / 3, 1.0 / 3, 1.0 / 3}, 10) == std::vector<int>{4, 3, 3});
    CHECK(split_counts({1.0 / 3, 1.0 / 3, 1.0 / 3}, 10) ==
          split_oracle({1.0 / 3, 1.0 / 3, 1.0 / 3}, 10));
    CHECK(split_counts({1.0, 0.0, 0.0}, 4) == std::vector<int>{4, 0, 0});

    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + static_cast<int>(rng.below(3));
        const int width = 1 + static_cast<int>(rng.below(12));
        // Random fractions normalized to sum 1.
        std::vector<double> f(m);
        double sum = 0.0;
        for (double& v : f) sum += (v = 0.05 + rng.unit());
        for (double& v : f) v /= sum;
        const auto counts = split_counts(f, width);
        CHECK(counts == split_oracle(f, width));
        int total = 0;
        for (int c : counts) total += c;
        CHECK(total == width);
    }
}

TEST_CASE("build_stages slices ranked channels contiguously") {
    const auto net = net_3x2();
    auto config = valid_config_3x2();
    const StagePlan plan = build_stages(config, net);

    CHECK(plan.count(0, 0) == 4);
    CHECK(plan.count(1, 0) == 2);
    CHECK(plan.count(2, 0) == 2);
    CHECK(plan.count(0, 1) == 1);
    CHECK(plan.count(1, 1) == 1);
    CHECK(plan.count(2, 1) == 2);

    // Layer 0 importance is already descending, layer 1 ascending: stage 0
    // must hold the most important channels in both.
    CHECK(plan.ranked_channels[0] == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(plan.ranked_channels[1] == std::vector<int>{3, 2, 1, 0});
    CHECK(plan.slices[0][0].begin == 0);
    CHECK(plan.slices[1][0].begin == 4);

    // Deterministic: building twice gives identical plans.
    CHECK(build_stages(config, net) == plan);
}

TEST_CASE("single-stage degenerate split produces no edges from empty stages") {
    const auto net = net_3x2();
    MappingConfig c;
    c.partition = {{1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
    c.indicator = {{1, 1}, {1, 1}, {0, 0}}; // stages 2/3 own nothing, bits are inert
    c.mapping = {0, 1, 2};
    c.dvfs = {0, 0, 0};
    const StagePlan plan = build_stages(c, net);
    CHECK(plan.count(0, 0) == 8);
    CHECK(plan.count(1, 0) == 0);
    for (const DependencyEdge& e : plan.edges) CHECK(e.producer == 0);
}

TEST_CASE("dependency edges follow the indicator matrix") {
    const auto net = net_3x2();
    auto config = valid_config_3x2(); // I[0][0] = 1, I[1][1] = 1
    const StagePlan plan = build_stages(config, net);

    // I[0][0]=1, c=4, 100 B/channel -> 400 B to consumers 1 and 2.
    // I[1][1]=1, c=1, 200 B/channel -> 200 B to consumer 2.
    REQUIRE(plan.edges.size() == 3);
    CHECK(plan.edges[0] == DependencyEdge{0, 1, 0, 400});
    CHECK(plan.edges[1] == DependencyEdge{0, 2, 0, 400});
    CHECK(plan.edges[2] == DependencyEdge{1, 2, 1, 200});
}

TEST_CASE("channel conservation holds for random configs") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = testsup::random_instance(rng);
        const StagePlan plan = build_stages(inst.config, *inst.net);
        for (int j = 0; j < plan.num_layers; ++j) {
            int total = 0;
            for (int i = 0; i < plan.num_stages; ++i) total += plan.count(i, j);
            CHECK(total == inst.net->layers[j].width);
        }
    }
}

TEST_CASE("adding an indicator bit keeps edges and never lowers reuse") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = testsup::random_instance(rng);
        if (inst.plat->num_units() < 2) continue;
        auto grown = inst.config;
        const int i = static_cast<int>(rng.below(grown.num_stages() - 1));
        const int j = static_cast<int>(rng.below(grown.num_layers()));
        if (grown.indicator[i][j]) continue;
        grown.indicator[i][j] = 1;

        const StagePlan before = build_stages(inst.config, *inst.net);
        const StagePlan after = build_stages(grown, *inst.net);
        for (const DependencyEdge& e : before.edges)
            CHECK(std::find(after.edges.begin(), after.edges.end(), e) != after.edges.end());
        CHECK(reuse_ratio(after) >= reuse_ratio(before));
    }
}

TEST_CASE("reuse ratio counts set bits over eligible positions") {
    const auto net = net_3x2();

    MappingConfig c = valid_config_3x2();
    // Eligible: stages 0 and 1 (not last), both owning channels at both
    // layers -> 4 positions.
    c.indicator = {{1, 1}, {1, 1}, {0, 0}};
    CHECK(reuse_ratio(c, net) == doctest::Approx(1.0));

    c.indicator = {{0, 0}, {0, 0}, {0, 0}};
    CHECK(reuse_ratio(c, net) == doctest::Approx(0.0));

    // Two-stage, two-layer case: two eligible bits, one set -> 0.5.
    NetworkSpec net2;
    net2.name = "n2";
    net2.base_accuracy = 0.9;
    net2.layers.push_back({4, {1, 1, 1, 1}, 64, 1.0});
    net2.layers.push_back({4, {1, 1, 1, 1}, 64, 1.0});
    MappingConfig c2;
    c2.partition = {{0.5, 0.5}, {0.5, 0.5}};
    c2.indicator = {{1, 0}, {0, 0}};
    c2.mapping = {0, 1};
    c2.dvfs = {0, 0};
    CHECK(reuse_ratio(c2, net2) == doctest::Approx(0.5));

    // Positions without channels are not eligible.
    c2.partition = {{1.0, 0.0}, {0.0, 1.0}};
    c2.indicator = {{1, 0}, {0, 0}};
    CHECK(reuse_ratio(c2, net2) == doctest::Approx(1.0));
}

TEST_CASE("space_size reproduces the complexity-style count") {
    // One layer, 8 ratios per stage entry, M = 3, 50 aggregate DVFS choices,
    // indicators ignored: 8^3 * 3! * 50 = 153600.
    NetworkSpec net;
    net.name = "one";
    net.base_accuracy = 0.9;
    net.layers.push_back({8, {1, 1, 1, 1, 1, 1, 1, 1}, 64, 1.0});

    PlatformSpec plat;
    plat.shared_memory_bytes = 1 << 20;
    ComputeUnit big;
    big.id = "big";
    big.alpha = 1.0;
    big.beta = 1.0;
    big.speed_factor = 1.0;
    for (int i = 1; i <= 50; ++i) big.dvfs_levels.push_back(i / 50.0);
    plat.units.push_back(big);
    plat.units.push_back({"a", 1.0, 1.0, {1.0}, 1.0});
    plat.units.push_back({"b", 1.0, 1.0, {1.0}, 1.0});
    plat.transfer.assign(3, std::vector<TransferLink>(3, {1e9, 1e-4}));
    for (int u = 0; u < 3; ++u) plat.transfer[u][u] = {1e12, 0.0};

    RatioSet eight;
    for (int i = 1; i <= 8; ++i) eight.values.push_back(i / 8.0);

    const SpaceSize size = space_size(net, plat, eight, {false, false, false});
    CHECK(!size.saturated);
    CHECK(size.value == 153600);
    CHECK(size.log10_value == doctest::Approx(std::log10(153600.0)).epsilon(1e-9));
}

TEST_CASE("space_size collapses to 1 when there is no freedom") {
    NetworkSpec net;
    net.name = "one";
    net.base_accuracy = 0.9;
    net.layers.push_back({2, {1, 1}, 8, 1.0});
    PlatformSpec plat;
    plat.shared_memory_bytes = 1024;
    plat.units.push_back({"only", 1.0, 1.0, {1.0}, 1.0});
    plat.transfer = {{{1e12, 0.0}}};
    RatioSet one;
    one.values = {1.0};
    const SpaceSize size = space_size(net, plat, one);
    CHECK(size.value == 1);
    CHECK(!size.saturated);
}

TEST_CASE("space_size saturates gracefully on huge spaces") {
    NetworkSpec net;
    net.name = "wide";
    net.base_accuracy = 0.9;
    for (int j = 0; j < 40; ++j) net.layers.push_back({8, std::vector<double>(8, 1.0), 64, 1.0});
    const auto plat = plat_3();
    const SpaceSize size = space_size(net, plat, RatioSet::eighths());
    CHECK(size.saturated);
    CHECK(size.value == std::numeric_limits<std::uint64_t>::max());
    CHECK(size.log10_value > 19.0);
}

TEST_CASE("config JSON round-trip preserves the value") {
    const auto plat = plat_3();
    const auto config = valid_config_3x2();
    const std::string text = config_to_json(config, plat);
    CHECK(config_from_json(text, plat) == config);
    CHECK_THROWS_AS(config_from_json(R"({"partition": []})", plat), parse_error);
}
