#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "stagemap/commands.hpp"
#include "stagemap/des.hpp"
#include "stagemap/errors.hpp"
#include "stagemap/eval.hpp"
#include "stagemap/fixtures.hpp"
#include "stagemap/search.hpp"

namespace py = pybind11;
using namespace stagemap;

PYBIND11_MODULE(_stagemap, m) {
    m.doc() = "Width-partitioned multi-exit deployment planning for heterogeneous SoCs";

    py::register_exception<error>(m, "StagemapError");

    py::class_<Layer>(m, "Layer")
        .def(py::init<>())
        .def_readwrite("width", &Layer::width)
        .def_readwrite("channel_importance", &Layer::channel_importance)
        .def_readwrite("output_feature_bytes_per_channel", &Layer::output_feature_bytes_per_channel)
        .def_readwrite("work_per_channel", &Layer::work_per_channel);

    py::class_<NetworkSpec>(m, "NetworkSpec")
        .def(py::init<>())
        .def_readwrite("name", &NetworkSpec::name)
        .def_readwrite("base_accuracy", &NetworkSpec::base_accuracy)
        .def_readwrite("layers", &NetworkSpec::layers)
        .def("num_layers", &NetworkSpec::num_layers);

    py::class_<TransferLink>(m, "TransferLink")
        .def(py::init<>())
        .def_readwrite("bandwidth_bytes_per_sec", &TransferLink::bandwidth_bytes_per_sec)
        .def_readwrite("fixed_latency_sec", &TransferLink::fixed_latency_sec);

    py::class_<ComputeUnit>(m, "ComputeUnit")
        .def(py::init<>())
        .def_readwrite("id", &ComputeUnit::id)
        .def_readwrite("alpha", &ComputeUnit::alpha)
        .def_readwrite("beta", &ComputeUnit::beta)
        .def_readwrite("dvfs_levels", &ComputeUnit::dvfs_levels)
        .def_readwrite("speed_factor", &ComputeUnit::speed_factor);

    py::class_<PlatformSpec>(m, "PlatformSpec")
        .def(py::init<>())
        .def_readwrite("units", &PlatformSpec::units)
        .def_readwrite("transfer", &PlatformSpec::transfer)
        .def_readwrite("shared_memory_bytes", &PlatformSpec::shared_memory_bytes)
        .def("num_units", &PlatformSpec::num_units)
        .def("unit_index", &PlatformSpec::unit_index);

    py::class_<RatioSet>(m, "RatioSet")
        .def(py::init<>())
        .def_readwrite("values", &RatioSet::values)
        .def_static("eighths", &RatioSet::eighths)
        .def_static("evenly_spaced", &RatioSet::evenly_spaced)
        .def("contains", &RatioSet::contains);

    py::class_<MappingConfig>(m, "MappingConfig")
        .def(py::init<>())
        .def_readwrite("partition", &MappingConfig::partition)
        .def_readwrite("indicator", &MappingConfig::indicator)
        .def_readwrite("mapping", &MappingConfig::mapping)
        .def_readwrite("dvfs", &MappingConfig::dvfs)
        .def("num_stages", &MappingConfig::num_stages)
        .def("num_layers", &MappingConfig::num_layers)
        .def("normalize", &MappingConfig::normalize)
        .def("__eq__", [](const MappingConfig& a, const MappingConfig& b) { return a == b; });

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("violations", &ValidationReport::violations)
        .def("ok", &ValidationReport::ok);

    py::class_<StageLayerSlice>(m, "StageLayerSlice")
        .def_readonly("count", &StageLayerSlice::count)
        .def_readonly("begin", &StageLayerSlice::begin);

    py::class_<DependencyEdge>(m, "DependencyEdge")
        .def_readonly("producer", &DependencyEdge::producer)
        .def_readonly("consumer", &DependencyEdge::consumer)
        .def_readonly("layer", &DependencyEdge::layer)
        .def_readonly("bytes", &DependencyEdge::bytes);

    py::class_<StagePlan>(m, "StagePlan")
        .def_readonly("num_stages", &StagePlan::num_stages)
        .def_readonly("num_layers", &StagePlan::num_layers)
        .def_readonly("unit_of_stage", &StagePlan::unit_of_stage)
        .def_readonly("slices", &StagePlan::slices)
        .def_readonly("ranked_channels", &StagePlan::ranked_channels)
        .def_readonly("edges", &StagePlan::edges)
        .def("count", &StagePlan::count);

    py::class_<SpaceOptions>(m, "SpaceOptions")
        .def(py::init<>())
        .def_readwrite("tied", &SpaceOptions::tied)
        .def_readwrite("constrain_columns", &SpaceOptions::constrain_columns)
        .def_readwrite("include_indicators", &SpaceOptions::include_indicators);

    py::class_<SpaceSize>(m, "SpaceSize")
        .def_readonly("value", &SpaceSize::value)
        .def_readonly("saturated", &SpaceSize::saturated)
        .def_readonly("log10_value", &SpaceSize::log10_value);

    py::class_<CostQuery>(m, "CostQuery")
        .def(py::init<>())
        .def_readwrite("layer", &CostQuery::layer)
        .def_readwrite("channels", &CostQuery::channels)
        .def_readwrite("unit", &CostQuery::unit)
        .def_readwrite("dvfs_scale", &CostQuery::dvfs_scale);

    py::class_<CostRecord>(m, "CostRecord")
        .def(py::init<>())
        .def_readwrite("layer", &CostRecord::layer)
        .def_readwrite("channels", &CostRecord::channels)
        .def_readwrite("unit", &CostRecord::unit)
        .def_readwrite("dvfs", &CostRecord::dvfs)
        .def_readwrite("latency_s", &CostRecord::latency_s);

    py::class_<CostTable>(m, "CostTable")
        .def(py::init<>())
        .def_readwrite("records", &CostTable::records);

    py::class_<CostProvider>(m, "CostProvider")
        .def("sublayer_latency", &CostProvider::sublayer_latency)
        .def("transfer_cost", &CostProvider::transfer_cost)
        .def("power", &CostProvider::power);

    py::class_<AnalyticCostProvider, CostProvider>(m, "AnalyticCostProvider")
        .def(py::init([](const NetworkSpec& net, const PlatformSpec& plat) {
            return new AnalyticCostProvider(std::make_shared<const NetworkSpec>(net),
                                            std::make_shared<const PlatformSpec>(plat));
        }));

    py::class_<TableCostProvider, CostProvider>(m, "TableCostProvider")
        .def(py::init([](const CostTable& table, const NetworkSpec& net,
                         const PlatformSpec& plat) {
            return new TableCostProvider(table, std::make_shared<const NetworkSpec>(net),
                                         std::make_shared<const PlatformSpec>(plat));
        }));

    py::class_<ExitProfile>(m, "ExitProfile")
        .def(py::init<>())
        .def_readwrite("total_samples", &ExitProfile::total_samples)
        .def_readwrite("exit_counts", &ExitProfile::exit_counts)
        .def_readwrite("stage_accuracy", &ExitProfile::stage_accuracy)
        .def("num_stages", &ExitProfile::num_stages);

    py::class_<SyntheticProfileParams>(m, "SyntheticProfileParams")
        .def(py::init<>())
        .def_readwrite("total_samples", &SyntheticProfileParams::total_samples)
        .def_readwrite("reuse_exponent", &SyntheticProfileParams::reuse_exponent)
        .def_readwrite("reuse_weight", &SyntheticProfileParams::reuse_weight);

    py::class_<ProfileSource>(m, "ProfileSource")
        .def(py::init<>())
        .def_readwrite("fixed", &ProfileSource::fixed)
        .def_readwrite("synthetic", &ProfileSource::synthetic);

    py::class_<Targets>(m, "Targets")
        .def(py::init<>())
        .def_readwrite("latency_s", &Targets::latency_s)
        .def_readwrite("energy_j", &Targets::energy_j)
        .def_readwrite("memory_bytes", &Targets::memory_bytes)
        .def_readwrite("reuse_cap", &Targets::reuse_cap);

    py::class_<Feasibility>(m, "Feasibility")
        .def_readonly("latency_ok", &Feasibility::latency_ok)
        .def_readonly("energy_ok", &Feasibility::energy_ok)
        .def_readonly("memory_ok", &Feasibility::memory_ok)
        .def_readonly("reuse_ok", &Feasibility::reuse_ok)
        .def("all", &Feasibility::all);

    py::class_<EvalReport>(m, "EvalReport")
        .def(py::init<>())
        .def_readonly("m_prime", &EvalReport::m_prime)
        .def_readonly("stage_latency_s", &EvalReport::stage_latency_s)
        .def_readonly("stage_energy_j", &EvalReport::stage_energy_j)
        .def_readonly("cumulative_latency_s", &EvalReport::cumulative_latency_s)
        .def_readonly("t_pi_s", &EvalReport::t_pi_s)
        .def_readonly("e_pi_j", &EvalReport::e_pi_j)
        .def_readonly("e_pi_by_depth_j", &EvalReport::e_pi_by_depth_j)
        .def_readonly("memory_bytes", &EvalReport::memory_bytes)
        .def_readonly("reuse", &EvalReport::reuse)
        .def_readonly("stage_accuracy", &EvalReport::stage_accuracy)
        .def_readonly("exit_counts", &EvalReport::exit_counts)
        .def_readonly("accuracy", &EvalReport::accuracy)
        .def_readonly("avg_latency_s", &EvalReport::avg_latency_s)
        .def_readonly("avg_energy_j", &EvalReport::avg_energy_j)
        .def_readonly("score", &EvalReport::score)
        .def_readonly("feasibility", &EvalReport::feasibility);

    py::enum_<EventKind>(m, "EventKind")
        .value("sublayer_complete", EventKind::sublayer_complete)
        .value("transfer_complete", EventKind::transfer_complete);

    py::class_<Event>(m, "Event")
        .def_readonly("time_s", &Event::time_s)
        .def_readonly("kind", &Event::kind)
        .def_readonly("stage", &Event::stage)
        .def_readonly("layer", &Event::layer)
        .def_readonly("producer", &Event::producer);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("completion_s", &SimResult::completion_s)
        .def_readonly("trace", &SimResult::trace);

    py::enum_<ObjectiveKind>(m, "ObjectiveKind")
        .value("score", ObjectiveKind::score)
        .value("latency", ObjectiveKind::latency)
        .value("energy", ObjectiveKind::energy);

    py::class_<SearchSpace>(m, "SearchSpace")
        .def(py::init<>())
        .def_readwrite("ratios", &SearchSpace::ratios)
        .def_readwrite("tied", &SearchSpace::tied);

    py::class_<SearchParams>(m, "SearchParams")
        .def(py::init<>())
        .def_readwrite("generations", &SearchParams::generations)
        .def_readwrite("population", &SearchParams::population)
        .def_readwrite("elite_fraction", &SearchParams::elite_fraction)
        .def_readwrite("mutation_rate", &SearchParams::mutation_rate)
        .def_readwrite("crossover_rate", &SearchParams::crossover_rate)
        .def_readwrite("seed", &SearchParams::seed)
        .def_readwrite("threads", &SearchParams::threads)
        .def_readwrite("objective", &SearchParams::objective);

    py::class_<EvaluationRecord>(m, "EvaluationRecord")
        .def_readonly("generation", &EvaluationRecord::generation)
        .def_readonly("config", &EvaluationRecord::config)
        .def_readonly("report", &EvaluationRecord::report);

    py::class_<ParetoEntry>(m, "ParetoEntry")
        .def_readonly("config", &ParetoEntry::config)
        .def_readonly("report", &ParetoEntry::report)
        .def_readonly("objectives", &ParetoEntry::objectives);

    py::class_<EvolveResult>(m, "EvolveResult")
        .def_readonly("pareto", &EvolveResult::pareto)
        .def_readonly("best_score_by_generation", &EvolveResult::best_score_by_generation)
        .def_readonly("feasible_count_by_generation", &EvolveResult::feasible_count_by_generation)
        .def_readonly("evaluations", &EvolveResult::evaluations)
        .def_readonly("feasible_found", &EvolveResult::feasible_found)
        .def_readonly("best_infeasible", &EvolveResult::best_infeasible);

    py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>());

    py::class_<FixturePaths>(m, "FixturePaths")
        .def_readonly("network", &FixturePaths::network)
        .def_readonly("platform", &FixturePaths::platform)
        .def_readonly("costs", &FixturePaths::costs)
        .def_readonly("profile", &FixturePaths::profile)
        .def_readonly("baseline_fast", &FixturePaths::baseline_fast)
        .def_readonly("baseline_frugal", &FixturePaths::baseline_frugal);

    // Specs and files
    m.def("load_network", &load_network);
    m.def("save_network", &save_network);
    m.def("network_from_json", &network_from_json);
    m.def("network_to_json", &network_to_json);
    m.def("validate_network", &validate_network);
    m.def("load_platform", &load_platform);
    m.def("save_platform", &save_platform);
    m.def("platform_from_json", &platform_from_json);
    m.def("platform_to_json", &platform_to_json);
    m.def("validate_platform", &validate_platform);
    m.def("config_from_json", &config_from_json);
    m.def("config_to_json", &config_to_json);
    m.def("load_config", &load_config);
    m.def("targets_from_json", &targets_from_json);
    m.def("targets_to_json", &targets_to_json);
    m.def("report_to_json", &report_to_json);
    m.def("report_from_json", &report_from_json);
    m.def("exit_profile_from_json", &exit_profile_from_json);
    m.def("exit_profile_to_json", &exit_profile_to_json);
    m.def("load_exit_profile", &load_exit_profile);
    m.def("save_exit_profile", &save_exit_profile);
    m.def("load_cost_table", &load_cost_table);
    m.def("save_cost_table", &save_cost_table);
    m.def("cost_table_from_csv", &cost_table_from_csv);
    m.def("cost_table_to_csv", &cost_table_to_csv);

    // Mapping operations
    m.def("validate", &validate);
    m.def("rank_channels", &rank_channels);
    m.def("split_counts", &split_counts);
    m.def("build_stages", &build_stages);
    m.def("reuse_ratio", py::overload_cast<const StagePlan&>(&reuse_ratio));
    m.def("reuse_ratio",
          py::overload_cast<const MappingConfig&, const NetworkSpec&>(&reuse_ratio));
    m.def("space_size", &space_size, py::arg("net"), py::arg("plat"), py::arg("ratios"),
          py::arg("opts") = SpaceOptions{});
    m.def("enumerate_columns", &enumerate_columns);

    // Costs
    m.def("power", &power);
    m.def("transfer_cost", &transfer_cost);

    // Performance model
    m.def("dvfs_scales", &dvfs_scales);
    m.def("cumulative_latency", &cumulative_latency);
    m.def("stage_latency", &stage_latency);
    m.def("stage_energy", &stage_energy);
    m.def("overall", &overall);
    m.def("memory_footprint", &memory_footprint);
    m.def("objective", &objective);
    m.def("check_constraints", &check_constraints);
    m.def("synthesize_exit_profile", &synthesize_exit_profile);
    m.def("resolve_profile", &resolve_profile);
    m.def("evaluate", &evaluate, py::arg("net"), py::arg("plat"), py::arg("config"),
          py::arg("costs"), py::arg("profile_source"), py::arg("targets"),
          py::arg("m_prime") = -1);

    // Simulation
    m.def("simulate", &simulate);
    m.def("trace_to_jsonl", &trace_to_jsonl);

    // Search
    m.def("objective_vector", &objective_vector);
    m.def("constraint_violation", &constraint_violation);
    m.def("random_config", &random_config);
    m.def("mutate", &mutate);
    m.def("crossover", &crossover);
    m.def("evolve", &evolve);
    m.def("brute_force", &brute_force, py::arg("net"), py::arg("plat"), py::arg("space"),
          py::arg("costs"), py::arg("profile_source"), py::arg("targets"),
          py::arg("cap") = std::uint64_t{1000000});
    m.def("pareto_front", &pareto_front);
    m.def("hypervolume", &hypervolume);
    m.def("pareto_to_json", &pareto_to_json);

    // Fixtures
    m.def("write_fixture_suite", &write_fixture_suite);
}
