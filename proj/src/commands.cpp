#include "stagemap/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "stagemap/des.hpp"
#include "stagemap/errors.hpp"
#include "stagemap/fixtures.hpp"

namespace stagemap {

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// `--config`, `--targets` and `--profile` accept a file path or inline JSON.
std::string inline_or_file(const std::string& value) {
    if (!value.empty() && value.front() == '{') return value;
    return read_text(value);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write file: " + path.string());
    out << text;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct LoadedRun {
    std::shared_ptr<const NetworkSpec> net;
    std::shared_ptr<const PlatformSpec> plat;
    std::unique_ptr<CostProvider> costs;
    ProfileSource profile;
    Targets targets;
};

LoadedRun load_run(const RunManifest& manifest) {
    LoadedRun run;
    run.net = std::make_shared<const NetworkSpec>(load_network(manifest.network_path));
    run.plat = std::make_shared<const PlatformSpec>(load_platform(manifest.platform_path));
    if (manifest.costs.empty() || manifest.costs == "analytic") {
        run.costs = std::make_unique<AnalyticCostProvider>(run.net, run.plat);
    } else {
        run.costs = std::make_unique<TableCostProvider>(load_cost_table(manifest.costs),
                                                        run.net, run.plat);
    }
    if (!manifest.profile.empty())
        run.profile.fixed = exit_profile_from_json(inline_or_file(manifest.profile));
    run.profile.synthetic.total_samples = manifest.profile_total_samples;
    if (!manifest.targets.empty())
        run.targets = targets_from_json(inline_or_file(manifest.targets));
    if (manifest.reuse_cap) run.targets.reuse_cap = manifest.reuse_cap;
    return run;
}

} // namespace

int cmd_evaluate(const RunManifest& manifest) {
    LoadedRun run = load_run(manifest);
    if (manifest.config.empty()) throw error("evaluate needs --config");
    const MappingConfig config = config_from_json(inline_or_file(manifest.config), *run.plat);

    const ValidationReport vr = validate(config, *run.net, *run.plat, manifest.space.ratios);
    if (!vr.ok()) {
        for (const std::string& v : vr.violations) std::cerr << "invalid config: " << v << "\n";
        return kExitError;
    }

    const EvalReport report = evaluate(*run.net, *run.plat, config, *run.costs, run.profile,
                                       run.targets, manifest.m_prime);
    std::filesystem::create_directories(manifest.out_dir);
    write_text(manifest.out_dir / "report.json", report_to_json(report));

    std::cout << "t_pi_s=" << fmt(report.t_pi_s) << " e_pi_j=" << fmt(report.e_pi_j)
              << " memory_bytes=" << report.memory_bytes << " reuse=" << fmt(report.reuse)
              << " accuracy=" << fmt(report.accuracy) << " score=" << fmt(report.score)
              << " feasible=" << (report.feasibility.all() ? "yes" : "no") << "\n";
    return report.feasibility.all() ? kExitOk : kExitInfeasible;
}

int cmd_optimize(const RunManifest& manifest) {
    LoadedRun run = load_run(manifest);
    SearchParams params = manifest.search;
    params.seed = manifest.seed;

    const EvolveResult result = evolve(*run.net, *run.plat, manifest.space, *run.costs,
                                       run.profile, run.targets, params);

    std::filesystem::create_directories(manifest.out_dir);

    std::ostringstream history;
    history << "generation,best_score,feasible_count\n";
    for (std::size_t g = 0; g < result.best_score_by_generation.size(); ++g)
        history << (g + 1) << ',' << fmt(result.best_score_by_generation[g]) << ','
                << result.feasible_count_by_generation[g] << '\n';
    write_text(manifest.out_dir / "history.csv", history.str());

    std::ostringstream evals;
    evals << "generation,index,score,accuracy,avg_latency_s,avg_energy_j,t_pi_s,e_pi_j,"
             "memory_bytes,reuse_ratio,feasible\n";
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
        const EvaluationRecord& r = result.evaluations[i];
        evals << r.generation << ',' << i << ',' << fmt(r.report.score) << ','
              << fmt(r.report.accuracy) << ',' << fmt(r.report.avg_latency_s) << ','
              << fmt(r.report.avg_energy_j) << ',' << fmt(r.report.t_pi_s) << ','
              << fmt(r.report.e_pi_j) << ',' << r.report.memory_bytes << ','
              << fmt(r.report.reuse) << ',' << (r.report.feasibility.all() ? 1 : 0) << '\n';
    }
    write_text(manifest.out_dir / "evals.csv", evals.str());

    if (!result.feasible_found) {
        nlohmann::ordered_json diag;
        diag["error"] = "no feasible configuration";
        diag["evaluations"] = result.evaluations.size();
        if (result.best_infeasible) {
            diag["best_infeasible"] = {
                {"config", nlohmann::ordered_json::parse(
                               config_to_json(result.best_infeasible->config, *run.plat))},
                {"report", nlohmann::ordered_json::parse(
                               report_to_json(result.best_infeasible->report))},
                {"violation",
                 constraint_violation(result.best_infeasible->report, run.targets)}};
        }
        write_text(manifest.out_dir / "diagnostics.json", diag.dump(2) + "\n");
        std::cerr << "no feasible configuration found; diagnostics written\n";
        return kExitNoFeasible;
    }

    write_text(manifest.out_dir / "pareto.json", pareto_to_json(result.pareto, *run.plat));

    // Best candidate by the run's ranking metric.
    const EvaluationRecord* best = nullptr;
    for (const EvaluationRecord& r : result.evaluations) {
        if (!r.report.feasibility.all()) continue;
        if (!best || r.report.score < best->report.score) best = &r;
    }
    nlohmann::ordered_json bj;
    bj["config"] = nlohmann::ordered_json::parse(config_to_json(best->config, *run.plat));
    bj["report"] = nlohmann::ordered_json::parse(report_to_json(best->report));
    write_text(manifest.out_dir / "best.json", bj.dump(2) + "\n");

    // Highlight rule: among Pareto members whose accuracy stays within
    // `accuracy_drop` of the base model, pick the best latency-energy product.
    const double floor_acc = run.net->base_accuracy - manifest.accuracy_drop;
    const ParetoEntry* pick = nullptr;
    for (const ParetoEntry& e : result.pareto) {
        if (e.report.accuracy < floor_acc) continue;
        if (!pick || e.report.avg_latency_s * e.report.avg_energy_j <
                         pick->report.avg_latency_s * pick->report.avg_energy_j)
            pick = &e;
    }
    if (!pick) {
        for (const ParetoEntry& e : result.pareto)
            if (!pick || e.report.accuracy > pick->report.accuracy) pick = &e;
    }
    std::cout << "pareto_size=" << result.pareto.size()
              << " evaluations=" << result.evaluations.size() << "\n";
    std::cout << "highlight: accuracy=" << fmt(pick->report.accuracy)
              << " avg_latency_s=" << fmt(pick->report.avg_latency_s)
              << " avg_energy_j=" << fmt(pick->report.avg_energy_j)
              << " t_pi_s=" << fmt(pick->report.t_pi_s) << " e_pi_j=" << fmt(pick->report.e_pi_j)
              << " reuse=" << fmt(pick->report.reuse) << "\n";
    return kExitOk;
}

int cmd_simulate(const RunManifest& manifest) {
    LoadedRun run = load_run(manifest);
    if (manifest.config.empty()) throw error("simulate needs --config");
    const MappingConfig config = config_from_json(inline_or_file(manifest.config), *run.plat);
    const ValidationReport vr = validate(config, *run.net, *run.plat, manifest.space.ratios);
    if (!vr.ok()) {
        for (const std::string& v : vr.violations) std::cerr << "invalid config: " << v << "\n";
        return kExitError;
    }

    const StagePlan plan = build_stages(config, *run.net);
    const std::vector<double> scales = dvfs_scales(*run.plat, config);
    const int m_prime = manifest.m_prime < 0 ? plan.num_stages : manifest.m_prime;

    const SimResult sim = simulate(plan, *run.costs, scales, m_prime);
    std::filesystem::create_directories(manifest.out_dir);
    write_text(manifest.out_dir / "trace.jsonl", trace_to_jsonl(sim.trace));

    const std::vector<double> closed = stage_latency(plan, *run.costs, scales);
    std::cout << "stage,unit,completion_s\n";
    for (int i = 0; i < m_prime; ++i)
        std::cout << i << ',' << run.plat->units[plan.unit_of_stage[i]].id << ','
                  << fmt(sim.completion_s[i]) << "\n";

    for (int i = 0; i < m_prime; ++i) {
        const double diff = std::fabs(sim.completion_s[i] - closed[i]);
        const double tol = 1e-9 * std::max(1.0, std::fabs(closed[i]));
        if (diff > tol) {
            std::cerr << "self-check failed at stage " << i << ": simulated "
                      << fmt(sim.completion_s[i]) << " vs closed-form " << fmt(closed[i]) << "\n";
            return kExitSelfCheckFailed;
        }
    }
    return kExitOk;
}

int cmd_gen_fixtures(const RunManifest& manifest) {
    const FixturePaths paths = write_fixture_suite(manifest.out_dir, manifest.seed);
    std::cout << "network=" << paths.network.string() << "\n"
              << "platform=" << paths.platform.string() << "\n"
              << "costs=" << paths.costs.string() << "\n"
              << "profile=" << paths.profile.string() << "\n"
              << "baseline_fast=" << paths.baseline_fast.string() << "\n"
              << "baseline_frugal=" << paths.baseline_frugal.string() << "\n";
    return kExitOk;
}

} // namespace stagemap
