#ifndef STAGEMAP_MODEL_HPP
#define STAGEMAP_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stagemap {

// One network layer, described by its width (channel count) and the scalar
// data the planner needs per channel. Channel importance is input data,
// produced by whatever ranking method the user prefers; it is never computed
// here.
struct Layer {
    int width = 0;
    std::vector<double> channel_importance;            // size == width, >= 0
    std::int64_t output_feature_bytes_per_channel = 0; // bytes of one channel's output map
    double work_per_channel = 0.0;                     // abstract cost units (analytic provider only)

    bool operator==(const Layer&) const = default;
};

// An ordered stack of layers plus the accuracy of the unpartitioned model.
// Immutable after loading; safe to share read-only across threads.
struct NetworkSpec {
    std::string name;
    double base_accuracy = 0.0; // in (0, 1]
    std::vector<Layer> layers;  // execution order

    int num_layers() const { return static_cast<int>(layers.size()); }

    bool operator==(const NetworkSpec&) const = default;
};

struct TransferLink {
    double bandwidth_bytes_per_sec = 0.0;
    double fixed_latency_sec = 0.0;

    bool operator==(const TransferLink&) const = default;
};

// One compute unit. Power is modelled as alpha + beta * scale, where scale is
// the selected DVFS level.
struct ComputeUnit {
    std::string id;
    double alpha = 0.0;              // static power, watts
    double beta = 0.0;               // dynamic power coefficient, watts per unit scale
    std::vector<double> dvfs_levels; // strictly increasing, each in (0, 1]
    double speed_factor = 1.0;       // analytic throughput multiplier, 1.0 = reference

    bool operator==(const ComputeUnit&) const = default;
};

// The target chip: units, the pairwise transfer matrix, and the shared-memory
// budget for retained intermediate features.
struct PlatformSpec {
    std::vector<ComputeUnit> units;
    std::vector<std::vector<TransferLink>> transfer; // M x M, row = src, col = dst
    std::int64_t shared_memory_bytes = 0;

    int num_units() const { return static_cast<int>(units.size()); }
    // -1 when the id is unknown.
    int unit_index(const std::string& id) const;

    bool operator==(const PlatformSpec&) const = default;
};

// Throw validation_error naming the first violated invariant (and the layer
// or unit it occurred at). Loaders call these, so code downstream never sees
// an invalid spec.
void validate_network(const NetworkSpec& net);
void validate_platform(const PlatformSpec& plat);

NetworkSpec network_from_json(const std::string& text);
std::string network_to_json(const NetworkSpec& net);
NetworkSpec load_network(const std::filesystem::path& path);
void save_network(const NetworkSpec& net, const std::filesystem::path& path);

PlatformSpec platform_from_json(const std::string& text);
std::string platform_to_json(const PlatformSpec& plat);
PlatformSpec load_platform(const std::filesystem::path& path);
void save_platform(const PlatformSpec& plat, const std::filesystem::path& path);

} // namespace stagemap

#endif
