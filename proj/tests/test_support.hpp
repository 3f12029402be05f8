#ifndef STAGEMAP_TEST_SUPPORT_HPP
#define STAGEMAP_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "stagemap/cost.hpp"
#include "stagemap/eval.hpp"
#include "stagemap/mapping.hpp"
#include "stagemap/model.hpp"
#include "stagemap/rng.hpp"
#include "stagemap/search.hpp"

namespace testsup {

using namespace stagemap;

inline bool rel_close(double a, double b, double tol = 1e-9) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// The worked two-stage / two-layer instance used across the latency, energy,
// simulation and CLI tests. All transfer times are dyadic, so the expected
// values are exact doubles: tau = [[2,3],[1,4]], u(layer 0) = 0.5,
// u(layer 1) = 0.375, stage completions [5, 6.5].
struct WorkedInstance {
    std::shared_ptr<const NetworkSpec> net;
    std::shared_ptr<const PlatformSpec> plat;
    MappingConfig config;
    CostTable table;

    std::unique_ptr<TableCostProvider> provider() const {
        return std::make_unique<TableCostProvider>(table, net, plat);
    }
};

inline WorkedInstance worked_instance() {
    WorkedInstance w;
    auto net = std::make_shared<NetworkSpec>();
    net->name = "tiny";
    net->base_accuracy = 0.9;
    net->layers.push_back({4, {4.0, 3.0, 2.0, 1.0}, 1000, 1.0});
    net->layers.push_back({4, {1.0, 1.0, 1.0, 1.0}, 500, 1.5});
    w.net = net;

    auto plat = std::make_shared<PlatformSpec>();
    plat->shared_memory_bytes = 1000000;
    plat->units.push_back({"cu0", 1.0, 1.0, {1.0}, 1.0});
    plat->units.push_back({"cu1", 2.0, 0.5, {1.0}, 1.0});
    plat->transfer = {{{1e12, 0.0}, {8000.0, 0.25}}, {{8000.0, 0.25}, {1e12, 0.0}}};
    w.plat = plat;

    w.config.partition = {{0.5, 0.5}, {0.5, 0.5}};
    w.config.indicator = {{1, 1}, {0, 0}};
    w.config.mapping = {0, 1};
    w.config.dvfs = {0, 0};

    w.table.records = {{0, 2, "cu0", 1.0, 2.0},
                       {1, 2, "cu0", 1.0, 3.0},
                       {0, 2, "cu1", 1.0, 1.0},
                       {1, 2, "cu1", 1.0, 4.0}};
    return w;
}

struct RandomInstance {
    std::shared_ptr<const NetworkSpec> net;
    std::shared_ptr<const PlatformSpec> plat;
    MappingConfig config;
    int m_prime = 1;

    std::unique_ptr<AnalyticCostProvider> provider() const {
        return std::make_unique<AnalyticCostProvider>(net, plat);
    }
};

// Randomized instance within the documented ranges (up to 5 stages, up to 10
// layers, random indicators, mappings and DVFS picks).
inline RandomInstance random_instance(Rng& rng) {
    const int m = 1 + static_cast<int>(rng.below(5));
    const int n = 1 + static_cast<int>(rng.below(10));

    auto net = std::make_shared<NetworkSpec>();
    net->name = "rand";
    net->base_accuracy = 0.5 + 0.5 * rng.unit();
    for (int j = 0; j < n; ++j) {
        Layer l;
        l.width = 1 + static_cast<int>(rng.below(12));
        for (int c = 0; c < l.width; ++c) l.channel_importance.push_back(rng.unit());
        l.output_feature_bytes_per_channel = 1 + static_cast<std::int64_t>(rng.below(4096));
        l.work_per_channel = 0.1 + rng.unit();
        net->layers.push_back(std::move(l));
    }

    auto plat = std::make_shared<PlatformSpec>();
    plat->shared_memory_bytes = 1 + static_cast<std::int64_t>(rng.below(1000000));
    const double level_pool[4] = {0.25, 0.5, 0.75, 1.0};
    for (int u = 0; u < m; ++u) {
        ComputeUnit cu;
        cu.id = "u" + std::to_string(u);
        cu.alpha = 2.0 * rng.unit();
        cu.beta = 3.0 * rng.unit();
        cu.speed_factor = 0.5 + 4.0 * rng.unit();
        const int count = 1 + static_cast<int>(rng.below(4));
        const int first = static_cast<int>(rng.below(4 - count + 1));
        for (int k = 0; k < count; ++k) cu.dvfs_levels.push_back(level_pool[first + k]);
        plat->units.push_back(std::move(cu));
    }
    plat->transfer.assign(m, std::vector<TransferLink>(m));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            if (i == k) plat->transfer[i][k] = {1e12, 0.0};
            else plat->transfer[i][k] = {std::pow(10.0, 3.0 + 6.0 * rng.unit()), 1e-3 * rng.unit()};
        }

    validate_network(*net);
    validate_platform(*plat);

    RandomInstance inst;
    inst.net = net;
    inst.plat = plat;
    inst.config = random_config(*net, *plat, {RatioSet::eighths(), false}, rng);
    inst.m_prime = 1 + static_cast<int>(rng.below(m));
    return inst;
}

inline std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("stagemap_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testsup

#endif
