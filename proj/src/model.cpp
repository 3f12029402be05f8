#include "stagemap/model.hpp"

#include <fstream>
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

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write file: " + path.string());
    out << text;
}

ordered_json parse(const std::string& text, const char* what) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw parse_error(std::string("malformed ") + what + " JSON");
    return j;
}

} // namespace

int PlatformSpec::unit_index(const std::string& id) const {
    for (int m = 0; m < num_units(); ++m)
        if (units[m].id == id) return m;
    return -1;
}

void validate_network(const NetworkSpec& net) {
    if (net.layers.empty()) throw validation_error("network must have at least one layer");
    if (!(net.base_accuracy > 0.0 && net.base_accuracy <= 1.0))
        throw validation_error("base_accuracy must be in (0, 1]");
    for (int j = 0; j < net.num_layers(); ++j) {
        const Layer& l = net.layers[j];
        const std::string at = "layer " + std::to_string(j) + ": ";
        if (l.width <= 0) throw validation_error(at + "width must be positive");
        if (static_cast<int>(l.channel_importance.size()) != l.width)
            throw validation_error(at + "channel_importance has " +
                                   std::to_string(l.channel_importance.size()) +
                                   " entries for width " + std::to_string(l.width));
        for (double imp : l.channel_importance)
            if (imp < 0.0) throw validation_error(at + "channel importance must be non-negative");
        if (l.output_feature_bytes_per_channel <= 0)
            throw validation_error(at + "output_feature_bytes_per_channel must be positive");
        if (!(l.work_per_channel > 0.0))
            throw validation_error(at + "work_per_channel must be positive");
    }
}

void validate_platform(const PlatformSpec& plat) {
    const int m = plat.num_units();
    if (m < 1) throw validation_error("platform must have at least one compute unit");
    if (plat.shared_memory_bytes <= 0)
        throw validation_error("shared_memory_bytes must be positive");
    for (int i = 0; i < m; ++i) {
        const ComputeUnit& cu = plat.units[i];
        const std::string at = "unit " + std::to_string(i) + " (" + cu.id + "): ";
        if (cu.id.empty()) throw validation_error("unit " + std::to_string(i) + ": id must not be empty");
        for (int k = 0; k < i; ++k)
            if (plat.units[k].id == cu.id) throw validation_error(at + "duplicate unit id");
        if (cu.alpha < 0.0) throw validation_error(at + "alpha must be non-negative");
        if (cu.beta < 0.0) throw validation_error(at + "beta must be non-negative");
        if (!(cu.speed_factor > 0.0)) throw validation_error(at + "speed_factor must be positive");
        if (cu.dvfs_levels.empty()) throw validation_error(at + "dvfs_levels must not be empty");
        double prev = 0.0;
        for (double lv : cu.dvfs_levels) {
            if (!(lv > 0.0 && lv <= 1.0)) throw validation_error(at + "dvfs level must be in (0, 1]");
            if (lv <= prev) throw validation_error(at + "dvfs levels must be strictly increasing");
            prev = lv;
        }
    }
    if (static_cast<int>(plat.transfer.size()) != m)
        throw validation_error("transfer matrix must have one row per unit");
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(plat.transfer[i].size()) != m)
            throw validation_error("transfer row " + std::to_string(i) + " must have " +
                                   std::to_string(m) + " entries");
        for (int k = 0; k < m; ++k) {
            const TransferLink& t = plat.transfer[i][k];
            const std::string at = "transfer[" + std::to_string(i) + "][" + std::to_string(k) + "]: ";
            if (!(t.bandwidth_bytes_per_sec > 0.0))
                throw validation_error(at + "bandwidth must be positive");
            if (t.fixed_latency_sec < 0.0)
                throw validation_error(at + "fixed latency must be non-negative");
            if (i == k && t.fixed_latency_sec != 0.0)
                throw validation_error(at + "diagonal fixed latency must be zero");
        }
    }
}

NetworkSpec network_from_json(const std::string& text) {
    ordered_json j = parse(text, "network");
    NetworkSpec net;
    try {
        net.name = j.at("name").get<std::string>();
        net.base_accuracy = j.at("base_accuracy").get<double>();
        for (const auto& lj : j.at("layers")) {
            Layer l;
            l.width = lj.at("width").get<int>();
            l.channel_importance = lj.at("channel_importance").get<std::vector<double>>();
            l.output_feature_bytes_per_channel = lj.at("output_feature_bytes_per_channel").get<std::int64_t>();
            l.work_per_channel = lj.at("work_per_channel").get<double>();
            net.layers.push_back(std::move(l));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("network schema: ") + e.what());
    }
    validate_network(net);
    return net;
}

std::string network_to_json(const NetworkSpec& net) {
    ordered_json j;
    j["name"] = net.name;
    j["base_accuracy"] = net.base_accuracy;
    j["layers"] = ordered_json::array();
    for (const Layer& l : net.layers) {
        ordered_json lj;
        lj["width"] = l.width;
        lj["channel_importance"] = l.channel_importance;
        lj["output_feature_bytes_per_channel"] = l.output_feature_bytes_per_channel;
        lj["work_per_channel"] = l.work_per_channel;
        j["layers"].push_back(std::move(lj));
    }
    return j.dump(2) + "\n";
}

NetworkSpec load_network(const std::filesystem::path& path) {
    return network_from_json(read_file(path));
}

void save_network(const NetworkSpec& net, const std::filesystem::path& path) {
    write_file(path, network_to_json(net));
}

PlatformSpec platform_from_json(const std::string& text) {
    ordered_json j = parse(text, "platform");
    PlatformSpec plat;
    try {
        plat.shared_memory_bytes = j.at("shared_memory_bytes").get<std::int64_t>();
        for (const auto& uj : j.at("units")) {
            ComputeUnit cu;
            cu.id = uj.at("id").get<std::string>();
            cu.alpha = uj.at("alpha").get<double>();
            cu.beta = uj.at("beta").get<double>();
            cu.dvfs_levels = uj.at("dvfs_levels").get<std::vector<double>>();
            cu.speed_factor = uj.at("speed_factor").get<double>();
            plat.units.push_back(std::move(cu));
        }
        for (const auto& row : j.at("transfer")) {
            std::vector<TransferLink> r;
            for (const auto& tj : row)
                r.push_back({tj.at("bandwidth").get<double>(), tj.at("latency").get<double>()});
            plat.transfer.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("platform schema: ") + e.what());
    }
    validate_platform(plat);
    return plat;
}

std::string platform_to_json(const PlatformSpec& plat) {
    ordered_json j;
    j["shared_memory_bytes"] = plat.shared_memory_bytes;
    j["units"] = ordered_json::array();
    for (const ComputeUnit& cu : plat.units) {
        ordered_json uj;
        uj["id"] = cu.id;
        uj["alpha"] = cu.alpha;
        uj["beta"] = cu.beta;
        uj["dvfs_levels"] = cu.dvfs_levels;
        uj["speed_factor"] = cu.speed_factor;
        j["units"].push_back(std::move(uj));
    }
    j["transfer"] = ordered_json::array();
    for (const auto& row : plat.transfer) {
        ordered_json rj = ordered_json::array();
        for (const TransferLink& t : row)
            rj.push_back({{"bandwidth", t.bandwidth_bytes_per_sec}, {"latency", t.fixed_latency_sec}});
        j["transfer"].push_back(std::move(rj));
    }
    return j.dump(2) + "\n";
}

PlatformSpec load_platform(const std::filesystem::path& path) {
    return platform_from_json(read_file(path));
}

void save_platform(const PlatformSpec& plat, const std::filesystem::path& path) {
    write_file(path, platform_to_json(plat));
}

} // namespace stagemap
