#include "stagemap/cost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "stagemap/errors.hpp"

namespace stagemap {

namespace {
constexpr double kScaleTol = 1e-12;

bool scale_in_levels(const ComputeUnit& unit, double scale) {
    for (double lv : unit.dvfs_levels)
        if (std::fabs(lv - scale) <= kScaleTol) return true;
    return false;
}
} // namespace

double power(const ComputeUnit& unit, double dvfs_scale) {
    if (!scale_in_levels(unit, dvfs_scale))
        throw validation_error("dvfs scale " + std::to_string(dvfs_scale) +
                               " is not a level of unit " + unit.id);
    return unit.alpha + unit.beta * dvfs_scale;
}

double transfer_cost(const PlatformSpec& plat, std::int64_t bytes, int src_unit, int dst_unit) {
    if (bytes < 0) throw validation_error("transfer bytes must be non-negative");
    if (src_unit == dst_unit) return 0.0;
    const TransferLink& link = plat.transfer.at(src_unit).at(dst_unit);
    return link.fixed_latency_sec + static_cast<double>(bytes) / link.bandwidth_bytes_per_sec;
}

CostProvider::CostProvider(std::shared_ptr<const NetworkSpec> net,
                           std::shared_ptr<const PlatformSpec> plat)
    : net_(std::move(net)), plat_(std::move(plat)) {
    if (!net_ || !plat_) throw error("cost provider needs both a network and a platform");
}

double CostProvider::transfer_cost(std::int64_t bytes, int src_unit, int dst_unit) const {
    return stagemap::transfer_cost(*plat_, bytes, src_unit, dst_unit);
}

double CostProvider::power(int unit, double dvfs_scale) const {
    return stagemap::power(plat_->units.at(unit), dvfs_scale);
}

void CostProvider::check_query(const CostQuery& q) const {
    if (q.layer < 0 || q.layer >= net_->num_layers())
        throw validation_error("cost query layer " + std::to_string(q.layer) + " out of range");
    if (q.unit < 0 || q.unit >= plat_->num_units())
        throw validation_error("cost query unit " + std::to_string(q.unit) + " out of range");
    if (q.channels < 0)
        throw validation_error("cost query channel count must be non-negative");
    if (!scale_in_levels(plat_->units[q.unit], q.dvfs_scale))
        throw validation_error("cost query dvfs scale " + std::to_string(q.dvfs_scale) +
                               " is not a level of unit " + plat_->units[q.unit].id);
}

double AnalyticCostProvider::sublayer_latency(const CostQuery& q) const {
    check_query(q);
    if (q.channels == 0) return 0.0;
    const double work = net_->layers[q.layer].work_per_channel * q.channels;
    return work / (plat_->units[q.unit].speed_factor * q.dvfs_scale);
}

CostTable cost_table_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("cost table is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "layer,channels,unit,dvfs,latency_s")
        throw parse_error("cost table header must be `layer,channels,unit,dvfs,latency_s`");

    CostTable table;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 5)
            throw parse_error("cost table line " + std::to_string(line_no) + ": expected 5 fields");
        CostRecord r;
        try {
            r.layer = std::stoi(fields[0]);
            r.channels = std::stoi(fields[1]);
            r.unit = fields[2];
            r.dvfs = std::stod(fields[3]);
            r.latency_s = std::stod(fields[4]);
        } catch (const std::exception&) {
            throw parse_error("cost table line " + std::to_string(line_no) + ": bad number");
        }
        if (r.layer < 0 || r.channels < 0)
            throw validation_error("cost table line " + std::to_string(line_no) +
                                   ": layer and channels must be non-negative");
        if (r.channels > 0 && !(r.latency_s > 0.0))
            throw validation_error("cost table line " + std::to_string(line_no) +
                                   ": latency must be positive for channels > 0");
        if (r.channels == 0 && r.latency_s != 0.0)
            throw validation_error("cost table line " + std::to_string(line_no) +
                                   ": latency must be zero for channels == 0");
        for (const CostRecord& prev : table.records)
            if (prev.layer == r.layer && prev.channels == r.channels && prev.unit == r.unit &&
                std::fabs(prev.dvfs - r.dvfs) <= kScaleTol)
                throw validation_error("cost table line " + std::to_string(line_no) +
                                       ": duplicate key");
        table.records.push_back(std::move(r));
    }
    return table;
}

std::string cost_table_to_csv(const CostTable& table) {
    std::ostringstream out;
    out << "layer,channels,unit,dvfs,latency_s\n";
    out.precision(17);
    for (const CostRecord& r : table.records)
        out << r.layer << ',' << r.channels << ',' << r.unit << ',' << r.dvfs << ','
            << r.latency_s << '\n';
    return out.str();
}

CostTable load_cost_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return cost_table_from_csv(ss.str());
}

void save_cost_table(const CostTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write file: " + path.string());
    out << cost_table_to_csv(table);
}

bool TableCostProvider::Key::operator<(const Key& o) const {
    if (layer != o.layer) return layer < o.layer;
    if (unit != o.unit) return unit < o.unit;
    if (channels != o.channels) return channels < o.channels;
    return dvfs < o.dvfs - kScaleTol;
}

TableCostProvider::TableCostProvider(CostTable table, std::shared_ptr<const NetworkSpec> net,
                                     std::shared_ptr<const PlatformSpec> plat)
    : CostProvider(std::move(net), std::move(plat)) {
    sorted_.reserve(table.records.size());
    for (const CostRecord& r : table.records) {
        const int unit = plat_->unit_index(r.unit);
        if (unit < 0)
            throw validation_error("cost table references unknown unit id: " + r.unit);
        sorted_.push_back({{r.layer, unit, r.channels, r.dvfs}, r.latency_s});
    }
    std::sort(sorted_.begin(), sorted_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

double TableCostProvider::lookup(int layer, int unit, int channels, double dvfs) const {
    const Key key{layer, unit, channels, dvfs};
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), key,
                               [](const auto& a, const Key& k) { return a.first < k; });
    if (it != sorted_.end() && !(key < it->first) && !(it->first < key)) return it->second;
    return std::numeric_limits<double>::quiet_NaN();
}

double TableCostProvider::sublayer_latency(const CostQuery& q) const {
    check_query(q);
    if (q.channels == 0) return 0.0;

    const double exact = lookup(q.layer, q.unit, q.channels, q.dvfs_scale);
    if (!std::isnan(exact)) return exact;

    // Collect the tabulated axes for this (layer, unit).
    std::set<int> cs;
    std::set<double> ths;
    for (const auto& [key, lat] : sorted_) {
        if (key.layer != q.layer || key.unit != q.unit) continue;
        if (key.channels > 0) cs.insert(key.channels);
        ths.insert(key.dvfs);
    }
    auto describe = [&] {
        return "layer " + std::to_string(q.layer) + ", unit " + plat_->units[q.unit].id +
               ", channels " + std::to_string(q.channels) + ", dvfs " + std::to_string(q.dvfs_scale);
    };
    if (cs.empty())
        throw validation_error("cost table has no records for " + describe());

    auto bracket = [](const auto& axis, double v, double tol) -> std::pair<double, double> {
        double lo = std::numeric_limits<double>::quiet_NaN();
        double hi = std::numeric_limits<double>::quiet_NaN();
        for (double x : axis) {
            if (std::fabs(x - v) <= tol) return {x, x};
            if (x < v) lo = x;
            if (x > v && std::isnan(hi)) hi = x;
        }
        return {lo, hi};
    };
    std::vector<double> c_axis(cs.begin(), cs.end());
    std::vector<double> t_axis(ths.begin(), ths.end());
    auto [c_lo, c_hi] = bracket(c_axis, q.channels, 0.0);
    auto [t_lo, t_hi] = bracket(t_axis, q.dvfs_scale, kScaleTol);
    if (std::isnan(c_lo) || std::isnan(c_hi) || std::isnan(t_lo) || std::isnan(t_hi))
        throw validation_error("cost query outside the tabulated range (no extrapolation): " +
                               describe());

    auto corner = [&](double c, double t) {
        const double v = lookup(q.layer, q.unit, static_cast<int>(c), t);
        if (std::isnan(v))
            throw validation_error("cost table grid has a hole at channels " +
                                   std::to_string(static_cast<int>(c)) + ", dvfs " +
                                   std::to_string(t) + " needed for " + describe());
        return v;
    };
    const double f00 = corner(c_lo, t_lo);
    const double f01 = corner(c_lo, t_hi);
    const double f10 = corner(c_hi, t_lo);
    const double f11 = corner(c_hi, t_hi);
    const double wc = (c_hi == c_lo) ? 0.0 : (q.channels - c_lo) / (c_hi - c_lo);
    const double wt = (t_hi == t_lo) ? 0.0 : (q.dvfs_scale - t_lo) / (t_hi - t_lo);
    const double at_lo = f00 + (f10 - f00) * wc;
    const double at_hi = f01 + (f11 - f01) * wc;
    return at_lo + (at_hi - at_lo) * wt;
}

} // namespace stagemap
