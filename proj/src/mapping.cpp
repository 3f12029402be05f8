#include "stagemap/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stagemap/errors.hpp"

namespace stagemap {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double kSumTol = 1e-9;
} // namespace

RatioSet RatioSet::eighths() {
    RatioSet r;
    for (int i = 0; i <= 8; ++i) r.values.push_back(i / 8.0);
    return r;
}

RatioSet RatioSet::evenly_spaced(int k) {
    if (k < 2) throw validation_error("ratio set needs at least 2 values");
    RatioSet r;
    for (int i = 0; i < k; ++i) r.values.push_back(static_cast<double>(i) / (k - 1));
    return r;
}

bool RatioSet::contains(double v) const {
    for (double x : values)
        if (std::fabs(x - v) <= kSumTol) return true;
    return false;
}

void MappingConfig::normalize() {
    if (indicator.empty()) return;
    for (auto& bit : indicator.back()) bit = 0;
}

MappingConfig config_from_json(const std::string& text, const PlatformSpec& plat) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw parse_error("malformed config JSON");
    MappingConfig c;
    try {
        c.partition = j.at("partition").get<std::vector<std::vector<double>>>();
        c.indicator = j.at("indicator").get<std::vector<std::vector<std::uint8_t>>>();
        c.mapping.clear();
        for (const auto& idj : j.at("mapping")) {
            const std::string id = idj.get<std::string>();
            const int m = plat.unit_index(id);
            if (m < 0) throw parse_error("config references unknown unit id: " + id);
            c.mapping.push_back(m);
        }
        c.dvfs.assign(plat.num_units(), 0);
        for (const auto& [id, level] : j.at("dvfs").items()) {
            const int m = plat.unit_index(id);
            if (m < 0) throw parse_error("config references unknown unit id: " + id);
            c.dvfs[m] = level.get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("config schema: ") + e.what());
    }
    c.normalize();
    return c;
}

std::string config_to_json(const MappingConfig& config, const PlatformSpec& plat) {
    ordered_json j;
    j["partition"] = config.partition;
    j["indicator"] = config.indicator;
    j["mapping"] = ordered_json::array();
    for (int m : config.mapping) j["mapping"].push_back(plat.units.at(m).id);
    ordered_json dj = ordered_json::object();
    for (int m = 0; m < static_cast<int>(config.dvfs.size()); ++m)
        dj[plat.units.at(m).id] = config.dvfs[m];
    j["dvfs"] = std::move(dj);
    return j.dump(2) + "\n";
}

MappingConfig load_config(const std::filesystem::path& path, const PlatformSpec& plat) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), plat);
}

ValidationReport validate(const MappingConfig& config, const NetworkSpec& net,
                          const PlatformSpec& plat, const RatioSet& ratios) {
    const int m = plat.num_units();
    const int n = net.num_layers();
    if (config.num_stages() != m)
        throw validation_error("config has " + std::to_string(config.num_stages()) +
                               " stages for a platform with " + std::to_string(m) + " units");
    for (const auto& row : config.partition)
        if (static_cast<int>(row.size()) != n)
            throw validation_error("partition rows must have one entry per layer");
    if (static_cast<int>(config.indicator.size()) != m)
        throw validation_error("indicator must have one row per stage");
    for (const auto& row : config.indicator)
        if (static_cast<int>(row.size()) != n)
            throw validation_error("indicator rows must have one entry per layer");
    if (static_cast<int>(config.mapping.size()) != m)
        throw validation_error("mapping must have one entry per stage");
    if (static_cast<int>(config.dvfs.size()) != m)
        throw validation_error("dvfs must have one entry per unit");

    ValidationReport report;
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += config.partition[i][j];
        if (std::fabs(sum - 1.0) > kSumTol)
            report.violations.push_back("layer " + std::to_string(j) + " coverage != 1 (sum " +
                                        std::to_string(sum) + ")");
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            if (!ratios.contains(config.partition[i][j]))
                report.violations.push_back("partition[" + std::to_string(i) + "][" + std::to_string(j) +
                                            "] not in the ratio set");
    std::vector<bool> seen(m, false);
    for (int k = 0; k < m; ++k) {
        const int unit = config.mapping[k];
        if (unit < 0 || unit >= m) {
            report.violations.push_back("mapping entry " + std::to_string(k) + " out of range");
            continue;
        }
        if (seen[unit])
            report.violations.push_back("duplicate unit " + std::to_string(unit) + " in mapping");
        seen[unit] = true;
    }
    for (int u = 0; u < m; ++u) {
        const int levels = static_cast<int>(plat.units[u].dvfs_levels.size());
        if (config.dvfs[u] < 0 || config.dvfs[u] >= levels)
            report.violations.push_back("dvfs level index for unit " + plat.units[u].id +
                                        " out of range");
    }
    for (int j = 0; j < n; ++j)
        if (config.indicator[m - 1][j] != 0) {
            report.violations.push_back("last-stage indicator row must be all zero");
            break;
        }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            if (config.indicator[i][j] > 1)
                report.violations.push_back("indicator[" + std::to_string(i) + "][" +
                                            std::to_string(j) + "] must be 0 or 1");
    return report;
}

std::vector<int> rank_channels(const Layer& layer) {
    std::vector<int> order(layer.width);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return layer.channel_importance[a] > layer.channel_importance[b];
    });
    return order;
}

std::vector<int> split_counts(const std::vector<double>& fractions, int width) {
    const int m = static_cast<int>(fractions.size());
    std::vector<int> counts(m, 0);
    std::vector<double> remainder(m, 0.0);
    int assigned = 0;
    for (int i = 0; i < m; ++i) {
        const double target = fractions[i] * width;
        // Guard against 0.375*8 = 2.9999... style noise before flooring.
        int base = static_cast<int>(std::floor(target + kSumTol));
        counts[i] = base;
        remainder[i] = target - base;
        assigned += base;
    }
    int leftover = width - assigned;
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return remainder[a] > remainder[b];
    });
    for (int k = 0; k < leftover; ++k) counts[order[k % m]] += 1;
    return counts;
}

StagePlan build_stages(const MappingConfig& config, const NetworkSpec& net) {
    const int m = config.num_stages();
    const int n = net.num_layers();
    StagePlan plan;
    plan.num_stages = m;
    plan.num_layers = n;
    plan.unit_of_stage = config.mapping;
    plan.indicator = config.indicator;
    if (!plan.indicator.empty())
        for (auto& bit : plan.indicator.back()) bit = 0;
    plan.slices.assign(m, std::vector<StageLayerSlice>(n));
    plan.ranked_channels.resize(n);

    for (int j = 0; j < n; ++j) {
        const Layer& layer = net.layers[j];
        plan.ranked_channels[j] = rank_channels(layer);
        std::vector<double> col(m);
        for (int i = 0; i < m; ++i) col[i] = config.partition[i][j];
        const std::vector<int> counts = split_counts(col, layer.width);
        int begin = 0;
        for (int i = 0; i < m; ++i) {
            plan.slices[i][j] = {counts[i], begin};
            begin += counts[i];
        }
    }

    for (int j = 0; j < n; ++j) {
        const std::int64_t per_channel = net.layers[j].output_feature_bytes_per_channel;
        for (int k = 0; k < m; ++k) {
            if (!plan.indicator[k][j] || plan.count(k, j) <= 0) continue;
            const std::int64_t bytes = plan.count(k, j) * per_channel;
            for (int i = k + 1; i < m; ++i)
                plan.edges.push_back({k, i, j, bytes});
        }
    }
    std::sort(plan.edges.begin(), plan.edges.end(), [](const DependencyEdge& a, const DependencyEdge& b) {
        return std::tie(a.layer, a.producer, a.consumer) < std::tie(b.layer, b.producer, b.consumer);
    });
    return plan;
}

double reuse_ratio(const StagePlan& plan) {
    int eligible = 0;
    int set = 0;
    for (int i = 0; i + 1 < plan.num_stages; ++i)
        for (int j = 0; j < plan.num_layers; ++j) {
            if (plan.count(i, j) <= 0) continue;
            ++eligible;
            if (plan.indicator[i][j]) ++set;
        }
    return eligible == 0 ? 0.0 : static_cast<double>(set) / eligible;
}

double reuse_ratio(const MappingConfig& config, const NetworkSpec& net) {
    return reuse_ratio(build_stages(config, net));
}

std::vector<std::vector<double>> enumerate_columns(const RatioSet& ratios, int num_stages) {
    std::vector<std::vector<double>> columns;
    std::vector<double> col(num_stages, 0.0);
    // DFS over ratio indices, pruning once the partial sum exceeds 1.
    auto rec = [&](auto&& self, int stage, double sum) -> void {
        if (stage == num_stages) {
            if (std::fabs(sum - 1.0) <= kSumTol) columns.push_back(col);
            return;
        }
        for (double v : ratios.values) {
            if (sum + v > 1.0 + kSumTol) continue;
            col[stage] = v;
            self(self, stage + 1, sum + v);
        }
        col[stage] = 0.0;
    };
    rec(rec, 0, 0.0);
    return columns;
}

SpaceSize space_size(const NetworkSpec& net, const PlatformSpec& plat,
                     const RatioSet& ratios, const SpaceOptions& opts) {
    const int m = plat.num_units();
    const int n_eff = opts.tied ? 1 : net.num_layers();

    double log10_sum = 0.0;
    bool saturated = false;
    unsigned __int128 value = 1;
    auto mul = [&](std::uint64_t factor) {
        log10_sum += std::log10(static_cast<double>(factor));
        value *= factor;
        if (value > std::numeric_limits<std::uint64_t>::max()) {
            saturated = true;
            value = std::numeric_limits<std::uint64_t>::max();
        }
    };

    std::uint64_t per_column;
    if (opts.constrain_columns) {
        per_column = enumerate_columns(ratios, m).size();
    } else {
        // Complexity-style upper bound: every entry picks freely.
        unsigned __int128 p = 1;
        for (int i = 0; i < m; ++i) {
            p *= ratios.values.size();
            if (p > std::numeric_limits<std::uint64_t>::max())
                p = std::numeric_limits<std::uint64_t>::max();
        }
        per_column = static_cast<std::uint64_t>(p);
    }
    if (per_column == 0) return {0, false, -std::numeric_limits<double>::infinity()};
    for (int j = 0; j < n_eff; ++j) mul(per_column);

    for (int k = 2; k <= m; ++k) mul(static_cast<std::uint64_t>(k));

    for (const ComputeUnit& cu : plat.units) mul(cu.dvfs_levels.size());

    if (opts.include_indicators) {
        const std::int64_t bits = static_cast<std::int64_t>(m - 1) * n_eff;
        for (std::int64_t b = 0; b < bits; ++b) mul(2);
    }

    return {static_cast<std::uint64_t>(value), saturated, log10_sum};
}

} // namespace stagemap
