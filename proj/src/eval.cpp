#include "stagemap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stagemap/errors.hpp"

namespace stagemap {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void validate_exit_profile(const ExitProfile& profile) {
    if (profile.total_samples <= 0)
        throw validation_error("exit profile total_samples must be positive");
    if (profile.exit_counts.empty())
        throw validation_error("exit profile must have at least one stage");
    if (profile.exit_counts.size() != profile.stage_accuracy.size())
        throw validation_error("exit profile stage lists must have equal length");
    std::int64_t sum = 0;
    for (std::int64_t n : profile.exit_counts) {
        if (n < 0) throw validation_error("exit counts must be non-negative");
        sum += n;
    }
    if (sum > profile.total_samples)
        throw validation_error("exit counts sum to more than total_samples");
    for (double a : profile.stage_accuracy)
        if (!(a >= 0.0 && a <= 1.0))
            throw validation_error("stage accuracy must be in [0, 1]");
}

ExitProfile exit_profile_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw parse_error("malformed exit profile JSON");
    ExitProfile p;
    try {
        p.total_samples = j.at("total_samples").get<std::int64_t>();
        for (const auto& sj : j.at("stages")) {
            p.exit_counts.push_back(sj.at("exit_count").get<std::int64_t>());
            p.stage_accuracy.push_back(sj.at("accuracy").get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("exit profile schema: ") + e.what());
    }
    validate_exit_profile(p);
    return p;
}

std::string exit_profile_to_json(const ExitProfile& profile) {
    ordered_json j;
    j["total_samples"] = profile.total_samples;
    j["stages"] = ordered_json::array();
    for (int i = 0; i < profile.num_stages(); ++i)
        j["stages"].push_back({{"exit_count", profile.exit_counts[i]},
                               {"accuracy", profile.stage_accuracy[i]}});
    return j.dump(2) + "\n";
}

ExitProfile load_exit_profile(const std::filesystem::path& path) {
    return exit_profile_from_json(read_file(path));
}

void save_exit_profile(const ExitProfile& profile, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write file: " + path.string());
    out << exit_profile_to_json(profile);
}

ExitProfile synthesize_exit_profile(const NetworkSpec& net, const StagePlan& plan,
                                    double reuse, const SyntheticProfileParams& params) {
    if (params.total_samples <= 0)
        throw validation_error("synthetic profile total_samples must be positive");
    const int m = plan.num_stages;
    const int n = plan.num_layers;

    // Importance mass captured by stages 1..i, over all layers.
    double total_mass = 0.0;
    for (int j = 0; j < n; ++j)
        for (double imp : net.layers[j].channel_importance) total_mass += imp;
    std::vector<double> captured(m, 0.0);
    double acc_mass = 0.0;
    std::int64_t captured_channels = 0;
    std::int64_t total_channels = 0;
    for (int j = 0; j < n; ++j) total_channels += net.layers[j].width;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const StageLayerSlice& s = plan.slices[i][j];
            for (int r = s.begin; r < s.begin + s.count; ++r)
                acc_mass += net.layers[j].channel_importance[plan.ranked_channels[j][r]];
            captured_channels += s.count;
        }
        // All-zero importance degenerates to plain channel fractions.
        captured[i] = total_mass > 0.0 ? acc_mass / total_mass
                                       : static_cast<double>(captured_channels) / total_channels;
    }

    // Later stages depend on republished features; restricted reuse damps
    // their contribution. The floor keeps the last stage's accuracy positive.
    const double damp = (1.0 - params.reuse_weight) +
                        params.reuse_weight * std::pow(reuse, params.reuse_exponent);

    ExitProfile p;
    p.total_samples = params.total_samples;
    double prev_acc = 0.0;
    std::int64_t prev_cum = 0;
    for (int i = 0; i < m; ++i) {
        double raw = net.base_accuracy * captured[i] * (i == 0 ? 1.0 : damp);
        const double acc = std::min(1.0, std::max(raw, prev_acc));
        const std::int64_t cum = static_cast<std::int64_t>(std::floor(acc * params.total_samples));
        p.stage_accuracy.push_back(acc);
        p.exit_counts.push_back(cum - prev_cum);
        prev_acc = acc;
        prev_cum = cum;
    }
    validate_exit_profile(p);
    return p;
}

ExitProfile resolve_profile(const ProfileSource& source, const NetworkSpec& net,
                            const StagePlan& plan, double reuse) {
    if (source.fixed) {
        if (source.fixed->num_stages() != plan.num_stages)
            throw validation_error("exit profile has " + std::to_string(source.fixed->num_stages()) +
                                   " stages but the plan has " + std::to_string(plan.num_stages));
        return *source.fixed;
    }
    return synthesize_exit_profile(net, plan, reuse, source.synthetic);
}

Targets targets_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw parse_error("malformed targets JSON");
    Targets t;
    if (j.contains("latency_s")) t.latency_s = j["latency_s"].get<double>();
    if (j.contains("energy_j")) t.energy_j = j["energy_j"].get<double>();
    if (j.contains("memory_bytes")) t.memory_bytes = j["memory_bytes"].get<std::int64_t>();
    if (j.contains("reuse_cap")) t.reuse_cap = j["reuse_cap"].get<double>();
    return t;
}

std::string targets_to_json(const Targets& targets) {
    ordered_json j = ordered_json::object();
    if (targets.latency_s) j["latency_s"] = *targets.latency_s;
    if (targets.energy_j) j["energy_j"] = *targets.energy_j;
    if (targets.memory_bytes) j["memory_bytes"] = *targets.memory_bytes;
    if (targets.reuse_cap) j["reuse_cap"] = *targets.reuse_cap;
    return j.dump();
}

std::vector<double> dvfs_scales(const PlatformSpec& plat, const MappingConfig& config) {
    if (static_cast<int>(config.dvfs.size()) != plat.num_units())
        throw validation_error("dvfs must have one entry per unit");
    std::vector<double> scales(plat.num_units());
    for (int u = 0; u < plat.num_units(); ++u)
        scales[u] = plat.units[u].dvfs_levels.at(config.dvfs[u]);
    return scales;
}

std::vector<std::vector<double>> cumulative_latency(const StagePlan& plan,
                                                    const CostProvider& costs,
                                                    const std::vector<double>& dvfs_scale_by_unit) {
    const int m = plan.num_stages;
    const int n = plan.num_layers;
    const NetworkSpec& net = costs.network();
    std::vector<std::vector<double>> grid(m, std::vector<double>(n, 0.0));
    for (int i = 0; i < m; ++i) {
        const int unit = plan.unit_of_stage[i];
        const double scale = dvfs_scale_by_unit.at(unit);
        for (int j = 0; j < n; ++j) {
            const double tau = costs.sublayer_latency({j, plan.count(i, j), unit, scale});
            double arrive = (j > 0) ? grid[i][j - 1] : 0.0;
            if (j > 0) {
                for (int k = 0; k < i; ++k) {
                    if (!plan.indicator[k][j - 1] || plan.count(k, j - 1) <= 0) continue;
                    const std::int64_t bytes =
                        static_cast<std::int64_t>(plan.count(k, j - 1)) *
                        net.layers[j - 1].output_feature_bytes_per_channel;
                    const double u = costs.transfer_cost(bytes, plan.unit_of_stage[k], unit);
                    arrive = std::max(arrive, grid[k][j - 1] + u);
                }
            }
            grid[i][j] = tau + arrive;
        }
    }
    return grid;
}

std::vector<double> stage_latency(const StagePlan& plan, const CostProvider& costs,
                                  const std::vector<double>& dvfs_scale_by_unit) {
    const auto grid = cumulative_latency(plan, costs, dvfs_scale_by_unit);
    std::vector<double> out;
    out.reserve(grid.size());
    for (const auto& row : grid) out.push_back(row.back());
    return out;
}

std::vector<double> stage_energy(const StagePlan& plan, const CostProvider& costs,
                                 const std::vector<double>& dvfs_scale_by_unit) {
    const int m = plan.num_stages;
    const int n = plan.num_layers;
    std::vector<double> energy(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const int unit = plan.unit_of_stage[i];
        const double scale = dvfs_scale_by_unit.at(unit);
        const double watts = costs.power(unit, scale);
        double busy = 0.0;
        for (int j = 0; j < n; ++j)
            busy += costs.sublayer_latency({j, plan.count(i, j), unit, scale});
        energy[i] = busy * watts;
    }
    return energy;
}

std::pair<double, double> overall(const StagePlan& plan, const CostProvider& costs,
                                  const std::vector<double>& dvfs_scale_by_unit, int m_prime) {
    if (m_prime < 1 || m_prime > plan.num_stages)
        throw validation_error("m_prime must be in [1, " + std::to_string(plan.num_stages) + "]");
    const auto latency = stage_latency(plan, costs, dvfs_scale_by_unit);
    const auto energy = stage_energy(plan, costs, dvfs_scale_by_unit);
    double t_pi = 0.0;
    double e_pi = 0.0;
    for (int i = 0; i < m_prime; ++i) {
        t_pi = std::max(t_pi, latency[i]);
        e_pi += energy[i];
    }
    return {t_pi, e_pi};
}

std::int64_t memory_footprint(const StagePlan& plan, const NetworkSpec& net) {
    std::int64_t bytes = 0;
    for (int i = 0; i < plan.num_stages; ++i)
        for (int j = 0; j < plan.num_layers; ++j)
            if (plan.indicator[i][j] && plan.count(i, j) > 0)
                bytes += static_cast<std::int64_t>(plan.count(i, j)) *
                         net.layers[j].output_feature_bytes_per_channel;
    return bytes;
}

double objective(const std::vector<double>& stage_latency_s,
                 const std::vector<double>& stage_energy_j,
                 const ExitProfile& profile, double base_accuracy) {
    const int m = static_cast<int>(stage_latency_s.size());
    if (static_cast<int>(stage_energy_j.size()) != m || profile.num_stages() != m)
        throw validation_error("objective inputs must agree on the stage count");
    const double acc_last = profile.stage_accuracy.back();
    if (!(acc_last > 0.0))
        throw validation_error("last-stage accuracy is zero; objective undefined");
    double latency_term = 0.0;
    double energy_term = 0.0;
    double cumulative_energy = 0.0;
    for (int i = 0; i < m; ++i) {
        cumulative_energy += stage_energy_j[i];
        latency_term += stage_latency_s[i] * static_cast<double>(profile.exit_counts[i]);
        energy_term += cumulative_energy * static_cast<double>(profile.exit_counts[i]);
    }
    return (base_accuracy / acc_last) * latency_term * energy_term;
}

Feasibility check_constraints(const EvalReport& report, const Targets& targets) {
    Feasibility f;
    if (targets.latency_s) f.latency_ok = report.t_pi_s < *targets.latency_s;
    if (targets.energy_j) f.energy_ok = report.e_pi_j < *targets.energy_j;
    if (targets.memory_bytes) f.memory_ok = report.memory_bytes < *targets.memory_bytes;
    if (targets.reuse_cap) f.reuse_ok = report.reuse <= *targets.reuse_cap;
    return f;
}

EvalReport evaluate(const NetworkSpec& net, const PlatformSpec& plat,
                    const MappingConfig& config, const CostProvider& costs,
                    const ProfileSource& profile_source, const Targets& targets,
                    int m_prime) {
    const StagePlan plan = build_stages(config, net);
    const std::vector<double> scales = dvfs_scales(plat, config);
    const int m = plan.num_stages;
    if (m_prime < 0) m_prime = m;
    if (m_prime < 1 || m_prime > m)
        throw validation_error("m_prime must be in [1, " + std::to_string(m) + "]");

    EvalReport r;
    r.m_prime = m_prime;
    r.cumulative_latency_s = cumulative_latency(plan, costs, scales);
    r.stage_latency_s.reserve(m);
    for (const auto& row : r.cumulative_latency_s) r.stage_latency_s.push_back(row.back());
    r.stage_energy_j = stage_energy(plan, costs, scales);

    r.e_pi_by_depth_j.resize(m);
    double cum = 0.0;
    for (int i = 0; i < m; ++i) {
        cum += r.stage_energy_j[i];
        r.e_pi_by_depth_j[i] = cum;
    }
    r.t_pi_s = *std::max_element(r.stage_latency_s.begin(), r.stage_latency_s.begin() + m_prime);
    r.e_pi_j = r.e_pi_by_depth_j[m_prime - 1];

    r.memory_bytes = memory_footprint(plan, net);
    r.reuse = reuse_ratio(plan);

    const ExitProfile profile = resolve_profile(profile_source, net, plan, r.reuse);
    r.stage_accuracy = profile.stage_accuracy;
    r.exit_counts = profile.exit_counts;
    r.accuracy = profile.stage_accuracy.back();
    r.score = objective(r.stage_latency_s, r.stage_energy_j, profile, net.base_accuracy);

    double lat_sum = 0.0;
    double en_sum = 0.0;
    double cum_e = 0.0;
    for (int i = 0; i < m; ++i) {
        cum_e += r.stage_energy_j[i];
        lat_sum += r.stage_latency_s[i] * static_cast<double>(profile.exit_counts[i]);
        en_sum += cum_e * static_cast<double>(profile.exit_counts[i]);
    }
    r.avg_latency_s = lat_sum / static_cast<double>(profile.total_samples);
    r.avg_energy_j = en_sum / static_cast<double>(profile.total_samples);

    r.feasibility = check_constraints(r, targets);
    return r;
}

std::string report_to_json(const EvalReport& report) {
    ordered_json j;
    j["m_prime"] = report.m_prime;
    j["stage_latency_s"] = report.stage_latency_s;
    j["stage_energy_j"] = report.stage_energy_j;
    j["cumulative_latency_s"] = report.cumulative_latency_s;
    j["t_pi_s"] = report.t_pi_s;
    j["e_pi_j"] = report.e_pi_j;
    j["e_pi_by_depth_j"] = report.e_pi_by_depth_j;
    j["memory_bytes"] = report.memory_bytes;
    j["reuse_ratio"] = report.reuse;
    j["stage_accuracy"] = report.stage_accuracy;
    j["exit_counts"] = report.exit_counts;
    j["accuracy"] = report.accuracy;
    j["avg_latency_s"] = report.avg_latency_s;
    j["avg_energy_j"] = report.avg_energy_j;
    j["score"] = report.score;
    j["feasibility"] = {{"latency_ok", report.feasibility.latency_ok},
                        {"energy_ok", report.feasibility.energy_ok},
                        {"memory_ok", report.feasibility.memory_ok},
                        {"reuse_ok", report.feasibility.reuse_ok},
                        {"feasible", report.feasibility.all()}};
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw parse_error("malformed report JSON");
    EvalReport r;
    try {
        r.m_prime = j.at("m_prime").get<int>();
        r.stage_latency_s = j.at("stage_latency_s").get<std::vector<double>>();
        r.stage_energy_j = j.at("stage_energy_j").get<std::vector<double>>();
        r.cumulative_latency_s = j.at("cumulative_latency_s").get<std::vector<std::vector<double>>>();
        r.t_pi_s = j.at("t_pi_s").get<double>();
        r.e_pi_j = j.at("e_pi_j").get<double>();
        r.e_pi_by_depth_j = j.at("e_pi_by_depth_j").get<std::vector<double>>();
        r.memory_bytes = j.at("memory_bytes").get<std::int64_t>();
        r.reuse = j.at("reuse_ratio").get<double>();
        r.stage_accuracy = j.at("stage_accuracy").get<std::vector<double>>();
        r.exit_counts = j.at("exit_counts").get<std::vector<std::int64_t>>();
        r.accuracy = j.at("accuracy").get<double>();
        r.avg_latency_s = j.at("avg_latency_s").get<double>();
        r.avg_energy_j = j.at("avg_energy_j").get<double>();
        r.score = j.at("score").get<double>();
        const auto& f = j.at("feasibility");
        r.feasibility.latency_ok = f.at("latency_ok").get<bool>();
        r.feasibility.energy_ok = f.at("energy_ok").get<bool>();
        r.feasibility.memory_ok = f.at("memory_ok").get<bool>();
        r.feasibility.reuse_ok = f.at("reuse_ok").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("report schema: ") + e.what());
    }
    return r;
}

} // namespace stagemap
