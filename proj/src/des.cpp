#include "stagemap/des.hpp"

#include <queue>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "stagemap/errors.hpp"

namespace stagemap {

namespace {

// Priority-queue ordering: earliest time first, ties broken by (kind, stage,
// layer, producer) so the trace is reproducible byte for byte.
struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.time_s, a.kind, a.stage, a.layer, a.producer) >
               std::tie(b.time_s, b.kind, b.stage, b.layer, b.producer);
    }
};

} // namespace

SimResult simulate(const StagePlan& plan, const CostProvider& costs,
                   const std::vector<double>& dvfs_scale_by_unit, int m_prime) {
    const int n = plan.num_layers;
    if (m_prime < 1 || m_prime > plan.num_stages)
        throw validation_error("m_prime must be in [1, " + std::to_string(plan.num_stages) + "]");

    // Incoming transfers per sublayer, restricted to instantiated stages.
    std::vector<std::vector<std::vector<DependencyEdge>>> incoming(
        m_prime, std::vector<std::vector<DependencyEdge>>(n));
    std::vector<std::vector<std::vector<DependencyEdge>>> outgoing(
        m_prime, std::vector<std::vector<DependencyEdge>>(n));
    for (const DependencyEdge& e : plan.edges) {
        if (e.consumer >= m_prime) continue;
        outgoing[e.producer][e.layer].push_back(e);
        // Feature of layer j gates the consumer's sublayer at layer j+1.
        if (e.layer + 1 < n) incoming[e.consumer][e.layer + 1].push_back(e);
    }

    // A sublayer waits on its stage predecessor plus every incoming transfer.
    std::vector<std::vector<int>> waiting(m_prime, std::vector<int>(n, 0));
    for (int i = 0; i < m_prime; ++i)
        for (int j = 0; j < n; ++j)
            waiting[i][j] = (j > 0 ? 1 : 0) + static_cast<int>(incoming[i][j].size());

    auto tau = [&](int stage, int layer) {
        const int unit = plan.unit_of_stage[stage];
        return costs.sublayer_latency({layer, plan.count(stage, layer), unit,
                                       dvfs_scale_by_unit.at(unit)});
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue;
    for (int i = 0; i < m_prime; ++i)
        if (waiting[i][0] == 0)
            queue.push({tau(i, 0), EventKind::sublayer_complete, i, 0, -1});

    SimResult result;
    result.completion_s.assign(m_prime, 0.0);
    int remaining = m_prime * n;

    auto release = [&](int stage, int layer, double now) {
        if (--waiting[stage][layer] == 0)
            queue.push({now + tau(stage, layer), EventKind::sublayer_complete, stage, layer, -1});
    };

    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();
        result.trace.push_back(ev);
        if (ev.kind == EventKind::sublayer_complete) {
            --remaining;
            if (ev.layer == n - 1) result.completion_s[ev.stage] = ev.time_s;
            for (const DependencyEdge& e : outgoing[ev.stage][ev.layer]) {
                const double u = costs.transfer_cost(e.bytes, plan.unit_of_stage[e.producer],
                                                     plan.unit_of_stage[e.consumer]);
                queue.push({ev.time_s + u, EventKind::transfer_complete, e.consumer, e.layer,
                            e.producer});
            }
            if (ev.layer + 1 < n) release(ev.stage, ev.layer + 1, ev.time_s);
        } else {
            // Transfers of last-layer features land in shared memory but gate
            // nothing further.
            if (ev.layer + 1 < n) release(ev.stage, ev.layer + 1, ev.time_s);
        }
    }

    if (remaining != 0)
        throw std::logic_error("simulation deadlocked; the stage/layer graph must be acyclic");
    return result;
}

std::string trace_to_jsonl(const std::vector<Event>& trace) {
    std::ostringstream out;
    for (const Event& ev : trace) {
        nlohmann::ordered_json j;
        j["t"] = ev.time_s;
        j["kind"] = ev.kind == EventKind::sublayer_complete ? "sublayer_complete"
                                                            : "transfer_complete";
        j["stage"] = ev.stage;
        j["layer"] = ev.layer;
        if (ev.kind == EventKind::transfer_complete) j["producer"] = ev.producer;
        out << j.dump() << '\n';
    }
    return out.str();
}

} // namespace stagemap
