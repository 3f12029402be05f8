#include "stagemap/fixtures.hpp"

#include <cmath>
#include <fstream>

#include "stagemap/cost.hpp"
#include "stagemap/eval.hpp"
#include "stagemap/mapping.hpp"
#include "stagemap/model.hpp"
#include "stagemap/rng.hpp"

namespace stagemap {

namespace {

NetworkSpec make_network(Rng& rng) {
    NetworkSpec net;
    net.name = "synthnet4";
    net.base_accuracy = 0.9;
    const int widths[4] = {8, 8, 8, 8};
    const std::int64_t feature_bytes[4] = {4096, 2048, 1024, 512};
    const double work[4] = {4e-4, 3e-4, 3e-4, 2e-4};
    for (int j = 0; j < 4; ++j) {
        Layer l;
        l.width = widths[j];
        l.output_feature_bytes_per_channel = feature_bytes[j];
        l.work_per_channel = work[j];
        // Decaying importance with a little jitter; early channels dominate,
        // so early stages capture most of the mass.
        double scale = 1.0;
        for (int c = 0; c < l.width; ++c) {
            l.channel_importance.push_back(scale * (0.9 + 0.2 * rng.unit()));
            scale *= 0.72;
        }
        net.layers.push_back(std::move(l));
    }
    return net;
}

PlatformSpec make_platform() {
    PlatformSpec plat;
    plat.shared_memory_bytes = 1000000;
    plat.units.push_back({"fast0", 2.0, 10.0, {0.4, 0.6, 0.8, 1.0}, 4.0});
    plat.units.push_back({"frugal0", 0.3, 1.2, {0.5, 1.0}, 1.0});
    plat.units.push_back({"frugal1", 0.3, 1.2, {0.5, 1.0}, 1.0});
    const int m = plat.num_units();
    plat.transfer.assign(m, std::vector<TransferLink>(m));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            plat.transfer[i][k] = (i == k) ? TransferLink{1e12, 0.0}
                                           : TransferLink{2e8, 5e-5};
    return plat;
}

CostTable make_cost_table(const NetworkSpec& net, const PlatformSpec& plat) {
    // Every (layer, unit, level, channel count) the evaluator can ever ask
    // for, so table lookups never interpolate on this suite.
    CostTable table;
    for (int j = 0; j < net.num_layers(); ++j)
        for (const ComputeUnit& cu : plat.units)
            for (double level : cu.dvfs_levels)
                for (int c = 1; c <= net.layers[j].width; ++c) {
                    const double latency =
                        net.layers[j].work_per_channel * c / (cu.speed_factor * level);
                    table.records.push_back({j, c, cu.id, level, latency});
                }
    return table;
}

ExitProfile make_profile() {
    ExitProfile p;
    p.total_samples = 1000;
    p.exit_counts = {600, 250, 100};
    p.stage_accuracy = {0.82, 0.87, 0.90};
    return p;
}

MappingConfig single_stage_config(const PlatformSpec& plat, int n, int unit) {
    const int m = plat.num_units();
    MappingConfig c;
    c.partition.assign(m, std::vector<double>(n, 0.0));
    for (int j = 0; j < n; ++j) c.partition[0][j] = 1.0;
    c.indicator.assign(m, std::vector<std::uint8_t>(n, 0));
    c.mapping.resize(m);
    c.mapping[0] = unit;
    int next = 0;
    for (int i = 1; i < m; ++i) {
        while (next == unit) ++next;
        c.mapping[i] = next++;
    }
    c.dvfs.resize(m);
    for (int u = 0; u < m; ++u)
        c.dvfs[u] = static_cast<int>(plat.units[u].dvfs_levels.size()) - 1;
    return c;
}

} // namespace

FixturePaths write_fixture_suite(const std::filesystem::path& dir, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    Rng rng(seed);

    const NetworkSpec net = make_network(rng);
    const PlatformSpec plat = make_platform();
    validate_network(net);
    validate_platform(plat);

    FixturePaths paths;
    paths.network = dir / "network.json";
    paths.platform = dir / "platform.json";
    paths.costs = dir / "costs.csv";
    paths.profile = dir / "profile.json";
    paths.baseline_fast = dir / "baseline_fast.json";
    paths.baseline_frugal = dir / "baseline_frugal.json";

    save_network(net, paths.network);
    save_platform(plat, paths.platform);
    save_cost_table(make_cost_table(net, plat), paths.costs);
    save_exit_profile(make_profile(), paths.profile);

    const int n = net.num_layers();
    std::ofstream(paths.baseline_fast) << config_to_json(single_stage_config(plat, n, 0), plat);
    std::ofstream(paths.baseline_frugal) << config_to_json(single_stage_config(plat, n, 1), plat);
    return paths;
}

} // namespace stagemap
