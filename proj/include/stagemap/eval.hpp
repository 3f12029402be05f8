#ifndef STAGEMAP_EVAL_HPP
#define STAGEMAP_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stagemap/cost.hpp"
#include "stagemap/mapping.hpp"
#include "stagemap/model.hpp"

namespace stagemap {

// Per-stage exit statistics: exit_counts[i] is the number of validation
// samples first classified correctly at stage i (all earlier stages having
// missed them), stage_accuracy[i] the accuracy when i+1 stages run.
struct ExitProfile {
    std::int64_t total_samples = 0;
    std::vector<std::int64_t> exit_counts;
    std::vector<double> stage_accuracy;

    int num_stages() const { return static_cast<int>(exit_counts.size()); }
    bool operator==(const ExitProfile&) const = default;
};

void validate_exit_profile(const ExitProfile& profile);
ExitProfile exit_profile_from_json(const std::string& text);
std::string exit_profile_to_json(const ExitProfile& profile);
ExitProfile load_exit_profile(const std::filesystem::path& path);
void save_exit_profile(const ExitProfile& profile, const std::filesystem::path& path);

// Knobs for the synthetic proxy profile (see synthesize_exit_profile).
struct SyntheticProfileParams {
    std::int64_t total_samples = 1000;
    double reuse_exponent = 0.5; // concave exponent applied to the reuse ratio
    double reuse_weight = 0.6;   // how much restricted reuse hurts later stages, in [0, 1]

    bool operator==(const SyntheticProfileParams&) const = default;
};

// NOT a model of real accuracy. This proxy exists only so end-to-end searches
// can run without trained checkpoints: stage accuracy grows with the
// importance mass captured by stages 1..i and shrinks when feature reuse is
// restricted; exit counts follow the successive accuracy differences.
ExitProfile synthesize_exit_profile(const NetworkSpec& net, const StagePlan& plan,
                                    double reuse, const SyntheticProfileParams& params);

// Either a fixed measured profile or the synthetic proxy.
struct ProfileSource {
    std::optional<ExitProfile> fixed;
    SyntheticProfileParams synthetic;

    bool operator==(const ProfileSource&) const = default;
};

ExitProfile resolve_profile(const ProfileSource& source, const NetworkSpec& net,
                            const StagePlan& plan, double reuse);

// Optional search constraints. Latency/energy/memory are strict upper bounds;
// the reuse cap is inclusive.
struct Targets {
    std::optional<double> latency_s;
    std::optional<double> energy_j;
    std::optional<std::int64_t> memory_bytes;
    std::optional<double> reuse_cap;

    bool operator==(const Targets&) const = default;
};

Targets targets_from_json(const std::string& text);
std::string targets_to_json(const Targets& targets);

struct Feasibility {
    bool latency_ok = true;
    bool energy_ok = true;
    bool memory_ok = true;
    bool reuse_ok = true;

    bool all() const { return latency_ok && energy_ok && memory_ok && reuse_ok; }
    bool operator==(const Feasibility&) const = default;
};

// Everything the evaluator knows about one configuration.
struct EvalReport {
    int m_prime = 0;                                       // instantiation depth used for totals
    std::vector<double> stage_latency_s;                   // completion time per stage
    std::vector<double> stage_energy_j;                    // compute energy per stage
    std::vector<std::vector<double>> cumulative_latency_s; // [stage][layer] grid
    double t_pi_s = 0.0;                                   // max stage latency over 1..m_prime
    double e_pi_j = 0.0;                                   // summed energy over 1..m_prime
    std::vector<double> e_pi_by_depth_j;                   // prefix sums, depth 1..M
    std::int64_t memory_bytes = 0;                         // retained shared-memory features
    double reuse = 0.0;
    std::vector<double> stage_accuracy;                    // from the profile used
    std::vector<std::int64_t> exit_counts;
    double accuracy = 0.0;                                 // last-stage accuracy
    double avg_latency_s = 0.0;                            // sum T_i * N_i / total samples
    double avg_energy_j = 0.0;                             // sum E_{1..i} * N_i / total samples
    double score = 0.0;                                    // search objective, lower is better
    Feasibility feasibility;

    bool operator==(const EvalReport&) const = default;
};

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

// Per-unit DVFS scale values selected by the config (unit index -> scale).
std::vector<double> dvfs_scales(const PlatformSpec& plat, const MappingConfig& config);

// Cumulative latency grid. Entry [i][j] is the completion time of stage i's
// sublayer at layer j: its own latency plus the max of its predecessor on the
// same stage and every publishing producer stage k < i (indicator set at
// layer j-1, nonzero channels there), the latter shifted by the feature
// transfer time between the two units.
std::vector<std::vector<double>> cumulative_latency(const StagePlan& plan,
                                                    const CostProvider& costs,
                                                    const std::vector<double>& dvfs_scale_by_unit);

// Last column of the grid: completion time per stage.
std::vector<double> stage_latency(const StagePlan& plan, const CostProvider& costs,
                                  const std::vector<double>& dvfs_scale_by_unit);

// E_i = sum_j tau_i^j * P(unit_i, scale). Waiting time carries no energy.
std::vector<double> stage_energy(const StagePlan& plan, const CostProvider& costs,
                                 const std::vector<double>& dvfs_scale_by_unit);

// (max stage latency, summed stage energy) over the first m_prime stages.
std::pair<double, double> overall(const StagePlan& plan, const CostProvider& costs,
                                  const std::vector<double>& dvfs_scale_by_unit, int m_prime);

// Bytes of published features (indicator set, channels > 0) that stay in
// shared memory for the whole inference.
std::int64_t memory_footprint(const StagePlan& plan, const NetworkSpec& net);

// Search objective, lower is better:
//   (base_accuracy / Acc_last) * sum_i(T_i * N_i) * sum_i(E_{1..i} * N_i)
// where E_{1..i} is the cumulative energy when i stages run.
double objective(const std::vector<double>& stage_latency_s,
                 const std::vector<double>& stage_energy_j,
                 const ExitProfile& profile, double base_accuracy);

Feasibility check_constraints(const EvalReport& report, const Targets& targets);

// Full pipeline: materialize, run the latency/energy model, attach a profile,
// score, and check constraints. m_prime < 0 means all stages.
EvalReport evaluate(const NetworkSpec& net, const PlatformSpec& plat,
                    const MappingConfig& config, const CostProvider& costs,
                    const ProfileSource& profile_source, const Targets& targets,
                    int m_prime = -1);

} // namespace stagemap

#endif
