#ifndef STAGEMAP_COMMANDS_HPP
#define STAGEMAP_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "stagemap/eval.hpp"
#include "stagemap/search.hpp"

namespace stagemap {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;          // any module error
inline constexpr int kExitInfeasible = 2;     // evaluated config violates a constraint
inline constexpr int kExitNoFeasible = 3;     // search found no feasible config
inline constexpr int kExitSelfCheckFailed = 4; // simulation disagrees with the closed form

// Everything a run needs. `config`, `targets` and `profile` accept either a
// file path or an inline JSON string (detected by a leading '{').
struct RunManifest {
    std::string network_path;
    std::string platform_path;
    std::string costs = "analytic"; // "analytic" or a cost-table CSV path
    std::string profile;            // empty = synthetic proxy
    std::string config;             // cmd_evaluate / cmd_simulate input
    std::string targets;
    std::optional<double> reuse_cap; // overrides targets.reuse_cap when set
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    int m_prime = -1;               // -1 = all stages
    SearchParams search;
    SearchSpace space{RatioSet::eighths(), false};
    double accuracy_drop = 0.005;   // highlight rule for the optimize summary
    std::int64_t profile_total_samples = 1000;
};

// Evaluates one config and writes <out>/report.json plus a stdout summary.
// Returns kExitOk when feasible, kExitInfeasible otherwise.
int cmd_evaluate(const RunManifest& manifest);

// Runs the evolutionary search and writes <out>/pareto.json, history.csv and
// evals.csv (one row per evaluated config, plot-ready). Prints the best
// latency-energy tradeoff among configs within the accuracy-drop highlight
// threshold. Returns kExitNoFeasible (and writes diagnostics.json) when
// nothing feasible was found.
int cmd_optimize(const RunManifest& manifest);

// Replays one config through the discrete-event simulator, writes
// <out>/trace.jsonl, prints the per-stage completion table, and cross-checks
// the closed-form model (kExitSelfCheckFailed on mismatch).
int cmd_simulate(const RunManifest& manifest);

// Writes the synthetic fixture suite into the output directory.
int cmd_gen_fixtures(const RunManifest& manifest);

} // namespace stagemap

#endif
