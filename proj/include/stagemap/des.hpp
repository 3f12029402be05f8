#ifndef STAGEMAP_DES_HPP
#define STAGEMAP_DES_HPP

#include <string>
#include <vector>

#include "stagemap/cost.hpp"
#include "stagemap/mapping.hpp"

namespace stagemap {

// Discrete-event replay of a plan's concurrent execution. This is the
// independent ground truth the closed-form latency model is checked against,
// and the source of human-readable execution traces.

enum class EventKind { sublayer_complete = 0, transfer_complete = 1 };

struct Event {
    double time_s = 0.0;
    EventKind kind = EventKind::sublayer_complete;
    int stage = 0;
    int layer = 0;
    int producer = -1; // producing stage for transfers, -1 otherwise

    bool operator==(const Event&) const = default;
};

struct SimResult {
    std::vector<double> completion_s; // per instantiated stage
    std::vector<Event> trace;         // time order, deterministic tie-break

    bool operator==(const SimResult&) const = default;
};

// Runs stages 1..m_prime. A sublayer starts once its stage's previous
// sublayer is done and every published feature set from earlier stages has
// arrived; transfers leave the producer the instant its sublayer completes
// and cost the consumer the link's transfer time. Producers are never
// blocked, and links have unlimited concurrency.
SimResult simulate(const StagePlan& plan, const CostProvider& costs,
                   const std::vector<double>& dvfs_scale_by_unit, int m_prime);

// One JSON object per line, in trace order.
std::string trace_to_jsonl(const std::vector<Event>& trace);

} // namespace stagemap

#endif
