#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stagemap/commands.hpp"
#include "stagemap/errors.hpp"

namespace {

stagemap::RatioSet parse_ratios(const std::string& text) {
    if (text.empty() || text == "eighths") return stagemap::RatioSet::eighths();
    stagemap::RatioSet r;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) r.values.push_back(std::stod(item));
    std::sort(r.values.begin(), r.values.end());
    return r;
}

void add_common(CLI::App* cmd, stagemap::RunManifest& m) {
    cmd->add_option("--network", m.network_path, "Network JSON file")->required();
    cmd->add_option("--platform", m.platform_path, "Platform JSON file")->required();
    cmd->add_option("--costs", m.costs, "Cost provider: 'analytic' or a cost-table CSV path");
    cmd->add_option("--profile", m.profile,
                    "Exit profile (JSON file or inline); omitted = synthetic proxy");
    cmd->add_option("--targets", m.targets, "Constraint targets (JSON file or inline)");
    cmd->add_option("--reuse-cap", m.reuse_cap, "Feature-reuse ratio cap, overrides targets");
    cmd->add_option("--out", m.out_dir, "Output directory");
    cmd->add_option("--seed", m.seed, "Run seed");
    cmd->add_option("--total-samples", m.profile_total_samples,
                    "Synthetic profile sample count");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Width-partitioned multi-exit deployment planning for heterogeneous SoCs"};
    app.require_subcommand(1);

    stagemap::RunManifest manifest;
    std::string ratios_text;

    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate one mapping config");
    add_common(evaluate, manifest);
    evaluate->add_option("--config", manifest.config, "Mapping config (JSON file or inline)")
        ->required();
    evaluate->add_option("--m-prime", manifest.m_prime, "Instantiated stage count (default all)");
    evaluate->add_option("--ratios", ratios_text, "Ratio set: 'eighths' or comma list");

    CLI::App* optimize = app.add_subcommand("optimize", "Evolutionary search over the space");
    add_common(optimize, manifest);
    optimize->add_option("--generations", manifest.search.generations, "Generations");
    optimize->add_option("--population", manifest.search.population, "Population size");
    optimize->add_option("--elite-fraction", manifest.search.elite_fraction, "Elite fraction");
    optimize->add_option("--mutation-rate", manifest.search.mutation_rate, "Mutation rate");
    optimize->add_option("--crossover-rate", manifest.search.crossover_rate, "Crossover rate");
    optimize->add_option("--threads", manifest.search.threads, "Parallel evaluation threads");
    optimize->add_flag("--tied", manifest.space.tied,
                       "Share one partition/indicator column across layers");
    optimize->add_option("--ratios", ratios_text, "Ratio set: 'eighths' or comma list");
    optimize->add_option("--acc-drop", manifest.accuracy_drop,
                         "Accuracy-drop threshold for the highlighted config");
    std::string objective_text = "score";
    optimize->add_option("--objective", objective_text, "Ranking metric: score|latency|energy");

    CLI::App* simulate = app.add_subcommand("simulate", "Discrete-event trace of one config");
    add_common(simulate, manifest);
    simulate->add_option("--config", manifest.config, "Mapping config (JSON file or inline)")
        ->required();
    simulate->add_option("--m-prime", manifest.m_prime, "Instantiated stage count (default all)");
    simulate->add_option("--ratios", ratios_text, "Ratio set: 'eighths' or comma list");

    CLI::App* gen = app.add_subcommand("gen-fixtures", "Write the synthetic fixture suite");
    gen->add_option("--out", manifest.out_dir, "Output directory")->required();
    gen->add_option("--seed", manifest.seed, "Fixture seed");

    CLI11_PARSE(app, argc, argv);

    try {
        manifest.space.ratios = parse_ratios(ratios_text);
        if (objective_text == "latency")
            manifest.search.objective = stagemap::ObjectiveKind::latency;
        else if (objective_text == "energy")
            manifest.search.objective = stagemap::ObjectiveKind::energy;
        else if (objective_text != "score")
            throw stagemap::error("unknown objective: " + objective_text);

        if (evaluate->parsed()) return stagemap::cmd_evaluate(manifest);
        if (optimize->parsed()) return stagemap::cmd_optimize(manifest);
        if (simulate->parsed()) return stagemap::cmd_simulate(manifest);
        if (gen->parsed()) return stagemap::cmd_gen_fixtures(manifest);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return stagemap::kExitError;
    }
    return stagemap::kExitError;
}
