#ifndef STAGEMAP_MAPPING_HPP
#define STAGEMAP_MAPPING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stagemap/model.hpp"

namespace stagemap {

// Allowed partition fractions. Columns of the partition matrix are drawn from
// this set and must sum to 1 per layer.
struct RatioSet {
    std::vector<double> values; // distinct, sorted, within [0, 1]

    // Multiples of 1/8 from 0 to 1 inclusive. Binary-exact, so column sums
    // are exact as well.
    static RatioSet eighths();
    // k evenly spaced values from 0 to 1 inclusive (k >= 2).
    static RatioSet evenly_spaced(int k);

    bool contains(double v) const; // tolerance 1e-9
    bool operator==(const RatioSet&) const = default;
};

// A full deployment decision: how each layer's channels are split across
// stages (partition), which stages publish their intermediate features for
// later stages (indicator), which unit runs each stage (mapping), and the
// DVFS level chosen per unit.
//
// Rows index stages, columns index layers. Stage order is invocation order:
// stage i+1 runs only when stage i's exit was not good enough.
struct MappingConfig {
    std::vector<std::vector<double>> partition;        // M x n fractions
    std::vector<std::vector<std::uint8_t>> indicator;  // M x n bits
    std::vector<int> mapping;                          // stage -> unit index, a permutation
    std::vector<int> dvfs;                             // unit -> level index

    int num_stages() const { return static_cast<int>(partition.size()); }
    int num_layers() const { return partition.empty() ? 0 : static_cast<int>(partition[0].size()); }

    // The last stage has no downstream consumer, so its indicator row is
    // meaningless; clear it to keep configs canonical.
    void normalize();

    bool operator==(const MappingConfig&) const = default;
};

MappingConfig config_from_json(const std::string& text, const PlatformSpec& plat);
std::string config_to_json(const MappingConfig& config, const PlatformSpec& plat);
MappingConfig load_config(const std::filesystem::path& path, const PlatformSpec& plat);

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Lists every violated invariant (column sums, ratio membership, duplicate
// units, dvfs range, stale last-stage indicators). Dimension mismatches are
// hard errors, not report entries.
ValidationReport validate(const MappingConfig& config, const NetworkSpec& net,
                          const PlatformSpec& plat, const RatioSet& ratios);

// One stage's share of one layer: `count` channels starting at `begin` in
// that layer's importance-ranked channel order.
struct StageLayerSlice {
    int count = 0;
    int begin = 0;

    bool operator==(const StageLayerSlice&) const = default;
};

// Producer stage `producer` publishes `bytes` of layer-`layer` features that
// consumer stage `consumer` picks up before its next layer.
struct DependencyEdge {
    int producer = 0;
    int consumer = 0;
    int layer = 0;
    std::int64_t bytes = 0;

    bool operator==(const DependencyEdge&) const = default;
};

// A configuration materialized against a concrete network: integer channel
// slices per (stage, layer), the channel ranking they index into, and the
// feature-dependency edges implied by the indicator matrix.
struct StagePlan {
    int num_stages = 0;
    int num_layers = 0;
    std::vector<int> unit_of_stage;                        // from MappingConfig::mapping
    std::vector<std::vector<StageLayerSlice>> slices;      // [stage][layer]
    std::vector<std::vector<int>> ranked_channels;         // [layer][rank] -> original channel
    std::vector<std::vector<std::uint8_t>> indicator;      // normalized copy
    std::vector<DependencyEdge> edges;                     // sorted by (layer, producer, consumer)

    int count(int stage, int layer) const { return slices[stage][layer].count; }

    bool operator==(const StagePlan&) const = default;
};

// Channel indices sorted by descending importance; ties keep ascending
// original index, so the result is deterministic.
std::vector<int> rank_channels(const Layer& layer);

// Split `width` channels into integer counts proportional to `fractions`
// using largest-remainder rounding; remaining units go to the largest
// fractional parts, earliest stage first on ties. Counts always sum to width.
std::vector<int> split_counts(const std::vector<double>& fractions, int width);

// Materialize a (valid) config: channels of every layer are ranked by
// importance, then sliced contiguously so earlier stages receive the most
// important channels. Deterministic.
StagePlan build_stages(const MappingConfig& config, const NetworkSpec& net);

// Fraction of eligible indicator positions that are set. A position (stage,
// layer) is eligible when the stage is not the last one and it actually owns
// channels there; with no eligible positions the ratio is 0.
double reuse_ratio(const StagePlan& plan);
double reuse_ratio(const MappingConfig& config, const NetworkSpec& net);

struct SpaceOptions {
    bool tied = false;              // one column pattern shared by all layers
    bool constrain_columns = true;  // count only columns summing to 1
    bool include_indicators = true; // multiply by 2^(free indicator bits)
};

struct SpaceSize {
    std::uint64_t value = 0; // saturates at uint64 max
    bool saturated = false;
    double log10_value = 0.0;

    bool operator==(const SpaceSize&) const = default;
};

// Number of distinct configurations:
//   |columns|^n_eff * M! * prod_m |dvfs_levels(m)| * 2^bits
// where n_eff is n (or 1 when tied), |columns| counts per-layer ratio
// columns (sum-to-1 ones only, unless constrain_columns is off, which counts
// all |ratios|^M assignments as a complexity-style upper bound), and bits are
// the free indicator positions: every (stage, layer) with stage below the
// last (times n_eff when tied).
SpaceSize space_size(const NetworkSpec& net, const PlatformSpec& plat,
                     const RatioSet& ratios, const SpaceOptions& opts = {});

// All partition columns over `ratios` for M stages summing to 1, in
// lexicographic ratio-index order. The enumeration brute_force walks.
std::vector<std::vector<double>> enumerate_columns(const RatioSet& ratios, int num_stages);

} // namespace stagemap

#endif
