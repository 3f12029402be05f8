#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "stagemap/des.hpp"
#include "stagemap/eval.hpp"
#include "test_support.hpp"

using namespace stagemap;
using testsup::rel_close;

namespace {

// Every event must appear after the events it depends on.
void check_topological(const StagePlan& plan, const std::vector<Event>& trace) {
    std::map<std::pair<int, int>, std::size_t> sublayer_pos;
    for (std::size_t idx = 0; idx < trace.size(); ++idx) {
        const Event& ev = trace[idx];
        if (ev.kind == EventKind::sublayer_complete) {
            sublayer_pos[{ev.stage, ev.layer}] = idx;
            if (ev.layer > 0) {
                auto it = sublayer_pos.find({ev.stage, ev.layer - 1});
                REQUIRE(it != sublayer_pos.end());
                CHECK(it->second < idx);
            }
        } else {
            auto it = sublayer_pos.find({ev.producer, ev.layer});
            REQUIRE(it != sublayer_pos.end());
            CHECK(it->second < idx);
        }
    }
    for (std::size_t idx = 1; idx < trace.size(); ++idx)
        CHECK(trace[idx - 1].time_s <= trace[idx].time_s);
}

} // namespace

TEST_CASE("worked instance: completions and the six-event trace") {
    const auto w = testsup::worked_instance();
    const auto costs = w.provider();
    const StagePlan plan = build_stages(w.config, *w.net);
    const SimResult sim = simulate(plan, *costs, {1.0, 1.0}, 2);

    CHECK(sim.completion_s == std::vector<double>{5.0, 6.5});
    REQUIRE(sim.trace.size() == 6);

    CHECK(sim.trace[0] == Event{1.0, EventKind::sublayer_complete, 1, 0, -1});
    CHECK(sim.trace[1] == Event{2.0, EventKind::sublayer_complete, 0, 0, -1});
    CHECK(sim.trace[2] == Event{2.5, EventKind::transfer_complete, 1, 0, 0});
    CHECK(sim.trace[3] == Event{5.0, EventKind::sublayer_complete, 0, 1, -1});
    CHECK(sim.trace[4] == Event{5.375, EventKind::transfer_complete, 1, 1, 0});
    CHECK(sim.trace[5] == Event{6.5, EventKind::sublayer_complete, 1, 1, -1});

    check_topological(plan, sim.trace);

    SUBCASE("the trace serializes one JSON object per line") {
        const std::string jsonl = trace_to_jsonl(sim.trace);
        CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 6);
        CHECK(jsonl.find("\"transfer_complete\"") != std::string::npos);
    }
}

TEST_CASE("single stage is sequential: n events, prefix-sum completions") {
    const auto w = testsup::worked_instance();
    auto cfg = w.config;
    cfg.partition = {{0.5, 0.5}, {0.5, 0.5}};
    cfg.indicator = {{0, 0}, {0, 0}};
    const auto costs = w.provider();
    const StagePlan plan = build_stages(cfg, *w.net);
    const SimResult sim = simulate(plan, *costs, {1.0, 1.0}, 1);

    REQUIRE(sim.completion_s.size() == 1);
    CHECK(sim.completion_s[0] == doctest::Approx(5.0));
    CHECK(sim.trace.size() == 2);
    for (const Event& ev : sim.trace) CHECK(ev.stage == 0);
}

TEST_CASE("uninstantiated stages leave no footprint in the trace") {
    const auto w = testsup::worked_instance();
    const auto costs = w.provider();
    const StagePlan plan = build_stages(w.config, *w.net);
    const SimResult sim = simulate(plan, *costs, {1.0, 1.0}, 1);
    for (const Event& ev : sim.trace) CHECK(ev.stage == 0);
    // The producer's publications to stage 2 are not simulated either.
    CHECK(sim.trace.size() == 2);
}

TEST_CASE("simulation is deterministic") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = testsup::random_instance(rng);
        const auto costs = inst.provider();
        const StagePlan plan = build_stages(inst.config, *inst.net);
        const auto scales = dvfs_scales(*inst.plat, inst.config);
        const SimResult a = simulate(plan, *costs, scales, inst.m_prime);
        const SimResult b = simulate(plan, *costs, scales, inst.m_prime);
        CHECK(a == b);
        CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
    }
}

TEST_CASE("simulation agrees with the closed form on random instances") {
    Rng rng(43);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto inst = testsup::random_instance(rng);
        const auto costs = inst.provider();
        const StagePlan plan = build_stages(inst.config, *inst.net);
        const auto scales = dvfs_scales(*inst.plat, inst.config);

        const SimResult sim = simulate(plan, *costs, scales, inst.m_prime);
        const auto closed = stage_latency(plan, *costs, scales);
        for (int i = 0; i < inst.m_prime; ++i) {
            CHECK(rel_close(sim.completion_s[i], closed[i]));
            ++checked;
        }
        check_topological(plan, sim.trace);
    }
    CHECK(checked > 300);
}

TEST_CASE("zero-width sublayers relay dependencies without cost") {
    // Stage 1 owns nothing at layer 1 but must still wait for stage 0's
    // layer-0 features before its layer-1 "sublayer" completes.
    auto net = std::make_shared<NetworkSpec>();
    net->name = "relay";
    net->base_accuracy = 0.9;
    net->layers.push_back({4, {1, 1, 1, 1}, 1000, 1.0});
    net->layers.push_back({4, {1, 1, 1, 1}, 1000, 1.0});
    auto plat = std::make_shared<PlatformSpec>();
    plat->shared_memory_bytes = 1 << 20;
    plat->units.push_back({"a", 1.0, 1.0, {1.0}, 1.0});
    plat->units.push_back({"b", 1.0, 1.0, {1.0}, 1.0});
    plat->transfer = {{{1e12, 0.0}, {1000.0, 0.5}}, {{1000.0, 0.5}, {1e12, 0.0}}};

    MappingConfig cfg;
    cfg.partition = {{0.5, 1.0}, {0.5, 0.0}};
    cfg.indicator = {{1, 0}, {0, 0}};
    cfg.mapping = {0, 1};
    cfg.dvfs = {0, 0};

    AnalyticCostProvider costs(net, plat);
    const StagePlan plan = build_stages(cfg, *net);
    const SimResult sim = simulate(plan, costs, {1.0, 1.0}, 2);
    const auto closed = stage_latency(plan, costs, {1.0, 1.0});
    CHECK(rel_close(sim.completion_s[1], closed[1]));
    // Stage 1: layer 0 takes 2 s; layer 1 is empty but waits for the
    // transfer of stage 0's layer-0 features: 2 + 0.5 + 2000/1000 = 4.5.
    CHECK(sim.completion_s[1] == doctest::Approx(4.5));
}
