#ifndef STAGEMAP_SEARCH_HPP
#define STAGEMAP_SEARCH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stagemap/eval.hpp"
#include "stagemap/mapping.hpp"
#include "stagemap/rng.hpp"

namespace stagemap {

// What the per-generation ranking minimizes. The Pareto set is always
// extracted over (avg latency, avg energy, accuracy) afterwards.
enum class ObjectiveKind { score = 0, latency = 1, energy = 2 };

struct SearchSpace {
    RatioSet ratios;
    bool tied = false; // one partition/indicator column shared by all layers

    bool operator==(const SearchSpace&) const = default;
};

struct SearchParams {
    int generations = 200;
    int population = 60;
    double elite_fraction = 0.1;
    double mutation_rate = 0.3;
    double crossover_rate = 0.7;
    std::uint64_t seed = 0;
    int threads = 1; // evaluation fan-out; never changes results
    ObjectiveKind objective = ObjectiveKind::score;

    bool operator==(const SearchParams&) const = default;
};

struct EvaluationRecord {
    int generation = 0;
    MappingConfig config;
    EvalReport report;

    bool operator==(const EvaluationRecord&) const = default;
};

// Objective vector layout used everywhere: (avg latency, avg energy,
// -accuracy), all minimized.
std::array<double, 3> objective_vector(const EvalReport& report);

struct ParetoEntry {
    MappingConfig config;
    EvalReport report;
    std::array<double, 3> objectives{};

    bool operator==(const ParetoEntry&) const = default;
};

struct EvolveResult {
    std::vector<ParetoEntry> pareto;               // nondominated feasible configs, sorted
    std::vector<double> best_score_by_generation;  // +inf until a feasible candidate appears
    std::vector<int> feasible_count_by_generation;
    std::vector<EvaluationRecord> evaluations;     // every evaluation, in order
    bool feasible_found = false;
    std::optional<EvaluationRecord> best_infeasible; // diagnostics when nothing was feasible
};

// Uniform sample over the (valid-by-construction) space.
MappingConfig random_config(const NetworkSpec& net, const PlatformSpec& plat,
                            const SearchSpace& space, Rng& rng);

// Perturbs one gene class: a partition column is resampled among the valid
// ones, an indicator bit flips, two mapping entries swap, or one unit's DVFS
// level steps by one (clamped at the ends). Output is always valid.
MappingConfig mutate(const MappingConfig& config, const NetworkSpec& net,
                     const PlatformSpec& plat, const SearchSpace& space, Rng& rng);

// Column-wise uniform crossover for partition and indicator (per-layer sums
// stay 1), whole mapping from one parent, per-unit DVFS pick. Output is
// always valid.
MappingConfig crossover(const MappingConfig& a, const MappingConfig& b,
                        const SearchSpace& space, Rng& rng);

// Elitist evolutionary search. Every generation evaluates the full
// population, drops constraint violators, ranks the rest by the selected
// objective, carries the elites and breeds the remainder from them. When a
// generation has no feasible candidate, parents fall back to the least
// violating ones so the line never goes extinct. Deterministic for a fixed
// seed, regardless of `threads`.
EvolveResult evolve(const NetworkSpec& net, const PlatformSpec& plat,
                    const SearchSpace& space, const CostProvider& costs,
                    const ProfileSource& profile_source, const Targets& targets,
                    const SearchParams& params);

// Enumerates every configuration (see space_size), evaluates, filters, and
// returns the exact Pareto set. Refuses spaces larger than `cap`.
std::vector<ParetoEntry> brute_force(const NetworkSpec& net, const PlatformSpec& plat,
                                     const SearchSpace& space, const CostProvider& costs,
                                     const ProfileSource& profile_source, const Targets& targets,
                                     std::uint64_t cap = 1000000);

// Indices of nondominated points (minimization in every dimension), sorted
// ascending. Duplicate vectors are all kept.
std::vector<std::size_t> pareto_front(const std::vector<std::vector<double>>& points);

// Hypervolume dominated by `points` relative to reference `ref`, minimization
// convention, up to 3 dimensions. Points not strictly inside the reference
// box contribute nothing.
double hypervolume(const std::vector<std::vector<double>>& points,
                   const std::vector<double>& ref);

// Sum of normalized constraint excesses; 0 for feasible reports.
double constraint_violation(const EvalReport& report, const Targets& targets);

std::string pareto_to_json(const std::vector<ParetoEntry>& pareto, const PlatformSpec& plat);

} // namespace stagemap

#endif
