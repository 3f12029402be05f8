#ifndef STAGEMAP_COST_HPP
#define STAGEMAP_COST_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "stagemap/model.hpp"

namespace stagemap {

struct CostQuery {
    int layer = 0;
    int channels = 0;       // >= 0; 0 means the sublayer is empty
    int unit = 0;           // index into PlatformSpec::units
    double dvfs_scale = 1.0; // must be one of the unit's levels
};

// P = alpha + beta * scale.
double power(const ComputeUnit& unit, double dvfs_scale);

// u = fixed latency + bytes / bandwidth; zero when src == dst (intra-unit
// reuse is free).
double transfer_cost(const PlatformSpec& plat, std::int64_t bytes, int src_unit, int dst_unit);

// Primitive costs consumed by the performance model. Implementations are
// read-only after construction; queries are pure and safe to issue from many
// threads at once.
class CostProvider {
public:
    CostProvider(std::shared_ptr<const NetworkSpec> net, std::shared_ptr<const PlatformSpec> plat);
    virtual ~CostProvider() = default;

    // Execution latency of `channels` channels of `layer` on `unit`, seconds.
    // Zero channels cost zero seconds.
    virtual double sublayer_latency(const CostQuery& q) const = 0;

    double transfer_cost(std::int64_t bytes, int src_unit, int dst_unit) const;
    double power(int unit, double dvfs_scale) const;

    const NetworkSpec& network() const { return *net_; }
    const PlatformSpec& platform() const { return *plat_; }

protected:
    // Throws validation_error on out-of-range indices or a scale that is not
    // one of the unit's levels.
    void check_query(const CostQuery& q) const;

    std::shared_ptr<const NetworkSpec> net_;
    std::shared_ptr<const PlatformSpec> plat_;
};

// latency = work_per_channel * channels / (speed_factor * scale).
class AnalyticCostProvider final : public CostProvider {
public:
    using CostProvider::CostProvider;
    double sublayer_latency(const CostQuery& q) const override;
};

struct CostRecord {
    int layer = 0;
    int channels = 0;
    std::string unit;  // unit id, resolved against the platform at provider build time
    double dvfs = 1.0;
    double latency_s = 0.0;

    bool operator==(const CostRecord&) const = default;
};

// Benchmarked latency records, keyed by (layer, channels, unit, dvfs).
struct CostTable {
    std::vector<CostRecord> records;

    bool operator==(const CostTable&) const = default;
};

// CSV with header `layer,channels,unit,dvfs,latency_s`. Duplicate keys and
// non-positive latencies (for channels > 0) are rejected.
CostTable cost_table_from_csv(const std::string& text);
std::string cost_table_to_csv(const CostTable& table);
CostTable load_cost_table(const std::filesystem::path& path);
void save_cost_table(const CostTable& table, const std::filesystem::path& path);

// Exact lookup first; otherwise bilinear interpolation over (channels, dvfs)
// among the records of the same (layer, unit). Queries outside the tabulated
// range, or over holes in the grid, fail rather than extrapolate.
class TableCostProvider final : public CostProvider {
public:
    TableCostProvider(CostTable table, std::shared_ptr<const NetworkSpec> net,
                      std::shared_ptr<const PlatformSpec> plat);
    double sublayer_latency(const CostQuery& q) const override;

private:
    struct Key {
        int layer;
        int unit;
        int channels;
        double dvfs;
        bool operator<(const Key& o) const;
    };
    double lookup(int layer, int unit, int channels, double dvfs) const; // exact, nan if absent
    std::vector<std::pair<Key, double>> sorted_; // binary-searchable
};

} // namespace stagemap

#endif
