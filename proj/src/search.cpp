#include "stagemap/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stagemap/errors.hpp"

namespace stagemap {

using ordered_json = nlohmann::ordered_json;

namespace {

// Precomputed gene pools for one (network, platform, space) triple.
struct SpaceContext {
    int num_stages = 0;
    int num_layers = 0;
    bool tied = false;
    std::vector<std::vector<double>> columns;         // valid partition columns
    std::vector<std::pair<int, int>> indicator_slots; // free (stage, layer) bits; layer -1 = all (tied)
};

SpaceContext make_context(const NetworkSpec& net, const PlatformSpec& plat,
                          const SearchSpace& space) {
    SpaceContext ctx;
    ctx.num_stages = plat.num_units();
    ctx.num_layers = net.num_layers();
    ctx.tied = space.tied;
    ctx.columns = enumerate_columns(space.ratios, ctx.num_stages);
    if (ctx.columns.empty())
        throw validation_error("ratio set admits no partition column summing to 1");
    for (int i = 0; i + 1 < ctx.num_stages; ++i) {
        if (space.tied) {
            ctx.indicator_slots.emplace_back(i, -1);
        } else {
            for (int j = 0; j < ctx.num_layers; ++j) ctx.indicator_slots.emplace_back(i, j);
        }
    }
    return ctx;
}

void assign_column(MappingConfig& config, int layer, const std::vector<double>& column) {
    for (int i = 0; i < static_cast<int>(column.size()); ++i) config.partition[i][layer] = column[i];
}

void set_slot(MappingConfig& config, const std::pair<int, int>& slot, std::uint8_t value) {
    if (slot.second < 0) {
        for (auto& bit : config.indicator[slot.first]) bit = value;
    } else {
        config.indicator[slot.first][slot.second] = value;
    }
}

std::uint8_t get_slot(const MappingConfig& config, const std::pair<int, int>& slot) {
    return slot.second < 0 ? config.indicator[slot.first][0]
                           : config.indicator[slot.first][slot.second];
}

MappingConfig random_config_ctx(const SpaceContext& ctx, const PlatformSpec& plat, Rng& rng) {
    MappingConfig c;
    c.partition.assign(ctx.num_stages, std::vector<double>(ctx.num_layers, 0.0));
    c.indicator.assign(ctx.num_stages, std::vector<std::uint8_t>(ctx.num_layers, 0));
    if (ctx.tied) {
        const auto& col = ctx.columns[rng.index(ctx.columns.size())];
        for (int j = 0; j < ctx.num_layers; ++j) assign_column(c, j, col);
    } else {
        for (int j = 0; j < ctx.num_layers; ++j)
            assign_column(c, j, ctx.columns[rng.index(ctx.columns.size())]);
    }
    for (const auto& slot : ctx.indicator_slots)
        set_slot(c, slot, rng.bernoulli(0.5) ? 1 : 0);
    c.mapping.resize(ctx.num_stages);
    for (int i = 0; i < ctx.num_stages; ++i) c.mapping[i] = i;
    rng.shuffle(c.mapping);
    c.dvfs.resize(plat.num_units());
    for (int u = 0; u < plat.num_units(); ++u)
        c.dvfs[u] = static_cast<int>(rng.index(plat.units[u].dvfs_levels.size()));
    c.normalize();
    return c;
}

MappingConfig mutate_ctx(const MappingConfig& config, const SpaceContext& ctx,
                         const PlatformSpec& plat, Rng& rng) {
    enum Gene { partition, indicator, mapping, dvfs };
    std::vector<Gene> genes{partition};
    if (!ctx.indicator_slots.empty()) genes.push_back(indicator);
    if (ctx.num_stages >= 2) genes.push_back(mapping);
    for (const ComputeUnit& cu : plat.units)
        if (cu.dvfs_levels.size() >= 2) {
            genes.push_back(dvfs);
            break;
        }

    MappingConfig out = config;
    switch (genes[rng.index(genes.size())]) {
    case partition: {
        const auto& col = ctx.columns[rng.index(ctx.columns.size())];
        if (ctx.tied) {
            for (int j = 0; j < ctx.num_layers; ++j) assign_column(out, j, col);
        } else {
            assign_column(out, static_cast<int>(rng.index(ctx.num_layers)), col);
        }
        break;
    }
    case indicator: {
        const auto& slot = ctx.indicator_slots[rng.index(ctx.indicator_slots.size())];
        set_slot(out, slot, get_slot(out, slot) ? 0 : 1);
        break;
    }
    case mapping: {
        const int a = static_cast<int>(rng.index(ctx.num_stages));
        int b = static_cast<int>(rng.index(ctx.num_stages - 1));
        if (b >= a) ++b;
        std::swap(out.mapping[a], out.mapping[b]);
        break;
    }
    case dvfs: {
        const int u = static_cast<int>(rng.index(plat.num_units()));
        const int step = rng.bernoulli(0.5) ? 1 : -1;
        const int top = static_cast<int>(plat.units[u].dvfs_levels.size()) - 1;
        out.dvfs[u] = std::clamp(out.dvfs[u] + step, 0, top);
        break;
    }
    }
    out.normalize();
    return out;
}

MappingConfig crossover_ctx(const MappingConfig& a, const MappingConfig& b,
                            const SpaceContext& ctx, Rng& rng) {
    if (a.num_stages() != b.num_stages() || a.num_layers() != b.num_layers() ||
        a.dvfs.size() != b.dvfs.size())
        throw validation_error("crossover parents must have identical dimensions");

    MappingConfig child = a;
    if (ctx.tied) {
        if (rng.bernoulli(0.5)) child.partition = b.partition;
        if (rng.bernoulli(0.5)) child.indicator = b.indicator;
    } else {
        for (int j = 0; j < ctx.num_layers; ++j)
            if (rng.bernoulli(0.5))
                for (int i = 0; i < ctx.num_stages; ++i) child.partition[i][j] = b.partition[i][j];
        for (int j = 0; j < ctx.num_layers; ++j)
            if (rng.bernoulli(0.5))
                for (int i = 0; i < ctx.num_stages; ++i) child.indicator[i][j] = b.indicator[i][j];
    }
    if (rng.bernoulli(0.5)) child.mapping = b.mapping;
    for (std::size_t u = 0; u < child.dvfs.size(); ++u)
        if (rng.bernoulli(0.5)) child.dvfs[u] = b.dvfs[u];
    child.normalize();
    return child;
}

// Identity key independent of any platform naming; used to deduplicate
// evaluated configs deterministically.
std::string canonical_key(const MappingConfig& c) {
    std::ostringstream ss;
    ss.precision(17);
    for (const auto& row : c.partition)
        for (double v : row) ss << v << ',';
    ss << '|';
    for (const auto& row : c.indicator)
        for (int v : row) ss << v;
    ss << '|';
    for (int m : c.mapping) ss << m << ',';
    ss << '|';
    for (int d : c.dvfs) ss << d << ',';
    return ss.str();
}

double ranking_metric(const EvalReport& report, ObjectiveKind kind) {
    switch (kind) {
    case ObjectiveKind::latency: return report.avg_latency_s;
    case ObjectiveKind::energy: return report.avg_energy_j;
    case ObjectiveKind::score: break;
    }
    return report.score;
}

std::vector<EvalReport> evaluate_population(const std::vector<MappingConfig>& configs,
                                            const NetworkSpec& net, const PlatformSpec& plat,
                                            const CostProvider& costs,
                                            const ProfileSource& profile_source,
                                            const Targets& targets, int threads) {
    std::vector<EvalReport> out(configs.size());
    if (threads <= 1 || configs.size() <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i)
            out[i] = evaluate(net, plat, configs[i], costs, profile_source, targets);
        return out;
    }
    // Evaluations are pure, so any scheduling yields the same per-index
    // results; they are merged by index afterwards.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            try {
                out[i] = evaluate(net, plat, configs[i], costs, profile_source, targets);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, static_cast<int>(configs.size()));
    pool.reserve(count);
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t d = 0; d < a.size(); ++d) {
        if (a[d] > b[d]) return false;
        if (a[d] < b[d]) strict = true;
    }
    return strict;
}

std::vector<ParetoEntry> extract_pareto(const std::vector<const EvaluationRecord*>& records) {
    // First occurrence wins; record order is deterministic.
    std::vector<const EvaluationRecord*> unique;
    std::map<std::string, bool> seen;
    for (const EvaluationRecord* r : records) {
        const std::string key = canonical_key(r->config);
        if (seen.emplace(key, true).second) unique.push_back(r);
    }
    std::vector<std::vector<double>> vectors;
    vectors.reserve(unique.size());
    for (const EvaluationRecord* r : unique) {
        const auto v = objective_vector(r->report);
        vectors.push_back({v[0], v[1], v[2]});
    }
    std::vector<ParetoEntry> entries;
    for (std::size_t idx : pareto_front(vectors))
        entries.push_back({unique[idx]->config, unique[idx]->report,
                           {vectors[idx][0], vectors[idx][1], vectors[idx][2]}});
    std::sort(entries.begin(), entries.end(), [](const ParetoEntry& a, const ParetoEntry& b) {
        if (a.objectives != b.objectives) return a.objectives < b.objectives;
        return canonical_key(a.config) < canonical_key(b.config);
    });
    return entries;
}

} // namespace

std::array<double, 3> objective_vector(const EvalReport& report) {
    return {report.avg_latency_s, report.avg_energy_j, -report.accuracy};
}

double constraint_violation(const EvalReport& report, const Targets& targets) {
    double v = 0.0;
    if (targets.latency_s && report.t_pi_s >= *targets.latency_s)
        v += (report.t_pi_s - *targets.latency_s) / *targets.latency_s;
    if (targets.energy_j && report.e_pi_j >= *targets.energy_j)
        v += (report.e_pi_j - *targets.energy_j) / *targets.energy_j;
    if (targets.memory_bytes && report.memory_bytes >= *targets.memory_bytes)
        v += static_cast<double>(report.memory_bytes - *targets.memory_bytes) /
             static_cast<double>(*targets.memory_bytes);
    if (targets.reuse_cap && report.reuse > *targets.reuse_cap)
        v += (report.reuse - *targets.reuse_cap) / std::max(*targets.reuse_cap, 1e-9);
    return v;
}

MappingConfig random_config(const NetworkSpec& net, const PlatformSpec& plat,
                            const SearchSpace& space, Rng& rng) {
    return random_config_ctx(make_context(net, plat, space), plat, rng);
}

MappingConfig mutate(const MappingConfig& config, const NetworkSpec& net,
                     const PlatformSpec& plat, const SearchSpace& space, Rng& rng) {
    return mutate_ctx(config, make_context(net, plat, space), plat, rng);
}

MappingConfig crossover(const MappingConfig& a, const MappingConfig& b,
                        const SearchSpace& space, Rng& rng) {
    SpaceContext ctx;
    ctx.num_stages = a.num_stages();
    ctx.num_layers = a.num_layers();
    ctx.tied = space.tied;
    return crossover_ctx(a, b, ctx, rng);
}

EvolveResult evolve(const NetworkSpec& net, const PlatformSpec& plat,
                    const SearchSpace& space, const CostProvider& costs,
                    const ProfileSource& profile_source, const Targets& targets,
                    const SearchParams& params) {
    if (params.generations < 1) throw validation_error("generations must be >= 1");
    if (params.population < 2) throw validation_error("population must be >= 2");
    if (!(params.elite_fraction > 0.0 && params.elite_fraction < 1.0))
        throw validation_error("elite_fraction must be in (0, 1)");
    if (!(params.mutation_rate >= 0.0 && params.mutation_rate <= 1.0) ||
        !(params.crossover_rate >= 0.0 && params.crossover_rate <= 1.0))
        throw validation_error("rates must be in [0, 1]");

    const SpaceContext ctx = make_context(net, plat, space);
    Rng rng(params.seed);

    EvolveResult result;
    result.evaluations.reserve(static_cast<std::size_t>(params.generations) * params.population);

    std::vector<MappingConfig> population;
    population.reserve(params.population);
    for (int i = 0; i < params.population; ++i)
        population.push_back(random_config_ctx(ctx, plat, rng));

    const int elite_count =
        std::max(1, static_cast<int>(std::lround(params.elite_fraction * params.population)));

    double best_infeasible_violation = std::numeric_limits<double>::infinity();
    double best_infeasible_metric = std::numeric_limits<double>::infinity();

    for (int gen = 1; gen <= params.generations; ++gen) {
        const std::vector<EvalReport> reports = evaluate_population(
            population, net, plat, costs, profile_source, targets, params.threads);

        const std::size_t base = result.evaluations.size();
        for (std::size_t i = 0; i < population.size(); ++i)
            result.evaluations.push_back({gen, population[i], reports[i]});

        // Rank: feasible candidates by the chosen metric; with none feasible,
        // fall back to least-violating so the search never goes extinct.
        std::vector<std::size_t> order(population.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::vector<std::size_t> feasible;
        for (std::size_t i = 0; i < population.size(); ++i)
            if (reports[i].feasibility.all()) feasible.push_back(i);

        double best_metric = std::numeric_limits<double>::infinity();
        for (std::size_t i : feasible)
            best_metric = std::min(best_metric, ranking_metric(reports[i], params.objective));
        result.best_score_by_generation.push_back(best_metric);
        result.feasible_count_by_generation.push_back(static_cast<int>(feasible.size()));
        if (!feasible.empty()) result.feasible_found = true;

        std::vector<std::size_t> pool;
        if (!feasible.empty()) {
            pool = feasible;
            std::stable_sort(pool.begin(), pool.end(), [&](std::size_t x, std::size_t y) {
                return ranking_metric(reports[x], params.objective) <
                       ranking_metric(reports[y], params.objective);
            });
        } else {
            pool = order;
            std::vector<double> violation(population.size());
            for (std::size_t i = 0; i < population.size(); ++i)
                violation[i] = constraint_violation(reports[i], targets);
            std::stable_sort(pool.begin(), pool.end(), [&](std::size_t x, std::size_t y) {
                if (violation[x] != violation[y]) return violation[x] < violation[y];
                return ranking_metric(reports[x], params.objective) <
                       ranking_metric(reports[y], params.objective);
            });
            const std::size_t lead = pool.front();
            if (violation[lead] < best_infeasible_violation ||
                (violation[lead] == best_infeasible_violation &&
                 ranking_metric(reports[lead], params.objective) < best_infeasible_metric)) {
                best_infeasible_violation = violation[lead];
                best_infeasible_metric = ranking_metric(reports[lead], params.objective);
                result.best_infeasible = result.evaluations[base + lead];
            }
        }

        if (gen == params.generations) break;

        std::vector<MappingConfig> elites;
        for (int e = 0; e < elite_count && e < static_cast<int>(pool.size()); ++e)
            elites.push_back(population[pool[e]]);

        std::vector<MappingConfig> next;
        next.reserve(params.population);
        next = elites;
        while (static_cast<int>(next.size()) < params.population) {
            MappingConfig child;
            if (rng.bernoulli(params.crossover_rate)) {
                const MappingConfig& a = elites[rng.index(elites.size())];
                const MappingConfig& b = elites[rng.index(elites.size())];
                child = crossover_ctx(a, b, ctx, rng);
            } else {
                child = elites[rng.index(elites.size())];
            }
            if (rng.bernoulli(params.mutation_rate)) child = mutate_ctx(child, ctx, plat, rng);
            next.push_back(std::move(child));
        }
        population = std::move(next);
    }

    std::vector<const EvaluationRecord*> feasible_records;
    for (const EvaluationRecord& r : result.evaluations)
        if (r.report.feasibility.all()) feasible_records.push_back(&r);
    result.pareto = extract_pareto(feasible_records);
    if (result.feasible_found) result.best_infeasible.reset();
    return result;
}

std::vector<ParetoEntry> brute_force(const NetworkSpec& net, const PlatformSpec& plat,
                                     const SearchSpace& space, const CostProvider& costs,
                                     const ProfileSource& profile_source, const Targets& targets,
                                     std::uint64_t cap) {
    const SpaceSize size = space_size(net, plat, space.ratios, {space.tied, true, true});
    if (size.saturated || size.value > cap) {
        std::ostringstream msg;
        msg << "space has " << (size.saturated ? std::string("~1e") + std::to_string(size.log10_value)
                                               : std::to_string(size.value))
            << " configurations, above the brute-force cap of " << cap;
        throw error(msg.str());
    }

    const SpaceContext ctx = make_context(net, plat, space);
    const int m = ctx.num_stages;
    const int n = ctx.num_layers;
    const int n_eff = ctx.tied ? 1 : n;
    const std::size_t bits = ctx.indicator_slots.size();

    std::vector<EvaluationRecord> records;
    std::vector<const EvaluationRecord*> feasible;

    std::vector<std::size_t> column_choice(n_eff, 0);
    MappingConfig config;
    config.partition.assign(m, std::vector<double>(n, 0.0));
    config.indicator.assign(m, std::vector<std::uint8_t>(n, 0));
    config.dvfs.assign(plat.num_units(), 0);

    // Nested counters: partition columns, indicator bits, mappings, DVFS.
    bool done = false;
    while (!done) {
        for (int je = 0; je < n_eff; ++je) {
            const auto& col = ctx.columns[column_choice[je]];
            if (ctx.tied) {
                for (int j = 0; j < n; ++j) assign_column(config, j, col);
            } else {
                assign_column(config, je, col);
            }
        }
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << bits); ++mask) {
            for (std::size_t b = 0; b < bits; ++b)
                set_slot(config, ctx.indicator_slots[b], (mask >> b) & 1 ? 1 : 0);

            std::vector<int> perm(m);
            for (int i = 0; i < m; ++i) perm[i] = i;
            do {
                config.mapping = perm;
                std::fill(config.dvfs.begin(), config.dvfs.end(), 0);
                bool dvfs_done = false;
                while (!dvfs_done) {
                    config.normalize();
                    records.push_back(
                        {0, config, evaluate(net, plat, config, costs, profile_source, targets)});

                    dvfs_done = true;
                    for (int u = 0; u < plat.num_units(); ++u) {
                        if (config.dvfs[u] + 1 <
                            static_cast<int>(plat.units[u].dvfs_levels.size())) {
                            ++config.dvfs[u];
                            std::fill(config.dvfs.begin(), config.dvfs.begin() + u, 0);
                            dvfs_done = false;
                            break;
                        }
                    }
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }

        done = true;
        for (int je = 0; je < n_eff; ++je) {
            if (column_choice[je] + 1 < ctx.columns.size()) {
                ++column_choice[je];
                std::fill(column_choice.begin(), column_choice.begin() + je, 0);
                done = false;
                break;
            }
        }
    }

    if (records.size() != size.value)
        throw std::logic_error("brute-force enumeration disagrees with space_size: " +
                               std::to_string(records.size()) + " vs " +
                               std::to_string(size.value));

    for (const EvaluationRecord& r : records)
        if (r.report.feasibility.all()) feasible.push_back(&r);
    return extract_pareto(feasible);
}

std::vector<std::size_t> pareto_front(const std::vector<std::vector<double>>& points) {
    if (points.empty()) return {};
    const std::size_t dims = points[0].size();
    for (const auto& p : points)
        if (p.size() != dims) throw validation_error("pareto_front points must share one dimension");

    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return points[a] < points[b];
    });

    // In lexicographic order a dominator always precedes what it dominates,
    // so it suffices to test against points kept so far.
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        bool dominated = false;
        for (std::size_t k : kept)
            if (dominates(points[k], points[idx])) {
                dominated = true;
                break;
            }
        if (!dominated) kept.push_back(idx);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

double hypervolume(const std::vector<std::vector<double>>& points,
                   const std::vector<double>& ref) {
    const std::size_t dims = ref.size();
    if (dims < 1 || dims > 3)
        throw validation_error("hypervolume supports 1 to 3 dimensions");
    std::vector<std::vector<double>> inside;
    for (const auto& p : points) {
        if (p.size() != dims) throw validation_error("hypervolume point dimension mismatch");
        bool ok = true;
        for (std::size_t d = 0; d < dims; ++d)
            if (!(p[d] < ref[d])) ok = false;
        if (ok) inside.push_back(p);
    }
    if (inside.empty()) return 0.0;

    if (dims == 1) {
        double best = ref[0];
        for (const auto& p : inside) best = std::min(best, p[0]);
        return ref[0] - best;
    }

    // 2D staircase area of the union of dominated boxes: keep the points with
    // strictly improving y in x order, then sum the strips between them.
    auto area2 = [](std::vector<std::array<double, 2>> pts, double rx, double ry) {
        std::sort(pts.begin(), pts.end());
        std::vector<std::array<double, 2>> front;
        double best_y = ry;
        for (const auto& p : pts) {
            if (p[1] < best_y) {
                front.push_back(p);
                best_y = p[1];
            }
        }
        double area = 0.0;
        for (std::size_t i = 0; i < front.size(); ++i) {
            const double x_hi = (i + 1 < front.size()) ? front[i + 1][0] : rx;
            area += (x_hi - front[i][0]) * (ry - front[i][1]);
        }
        return area;
    };

    if (dims == 2) {
        std::vector<std::array<double, 2>> pts;
        for (const auto& p : inside) pts.push_back({p[0], p[1]});
        return area2(std::move(pts), ref[0], ref[1]);
    }

    // 3D: sweep slabs along the third axis; each slab contributes its height
    // times the 2D area of everything at or below it.
    std::vector<double> zs;
    for (const auto& p : inside) zs.push_back(p[2]);
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    double volume = 0.0;
    for (std::size_t s = 0; s < zs.size(); ++s) {
        const double z_lo = zs[s];
        const double z_hi = (s + 1 < zs.size()) ? zs[s + 1] : ref[2];
        std::vector<std::array<double, 2>> pts;
        for (const auto& p : inside)
            if (p[2] <= z_lo) pts.push_back({p[0], p[1]});
        volume += (z_hi - z_lo) * area2(std::move(pts), ref[0], ref[1]);
    }
    return volume;
}

std::string pareto_to_json(const std::vector<ParetoEntry>& pareto, const PlatformSpec& plat) {
    ordered_json j;
    j["objectives"] = {"avg_latency_s", "avg_energy_j", "accuracy"};
    j["members"] = ordered_json::array();
    for (const ParetoEntry& e : pareto) {
        ordered_json mj;
        mj["objectives"] = {{"avg_latency_s", e.objectives[0]},
                            {"avg_energy_j", e.objectives[1]},
                            {"accuracy", -e.objectives[2]}};
        mj["config"] = ordered_json::parse(config_to_json(e.config, plat));
        mj["report"] = ordered_json::parse(report_to_json(e.report));
        j["members"].push_back(std::move(mj));
    }
    return j.dump(2) + "\n";
}

} // namespace stagemap
