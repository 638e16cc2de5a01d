#include "spikeplast/run_config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spikeplast {

using nlohmann::json;

std::string RunConfig::resolved_data_dir() const {
    if (!data_dir.empty()) return data_dir;
    if (const char* env = std::getenv("SPIKEPLAST_DATA")) return env;
    return "data";
}

void RunConfig::validate() const {
    if (dataset != "mnist" && dataset != "fashion" && dataset != "cifar10")
        throw config_error("unknown dataset '" + dataset + "' (expected mnist, fashion, cifar10)");
    if (per_class < 0) throw config_error("per_class must be >= 0");
    if (conv_epochs < 0 || fc_epochs < 0) throw config_error("epoch counts must be >= 0");
    if (threads < 0) throw config_error("threads must be >= 0 (0 = all cores)");
    net.validate();
}

NetworkSpec dataset_preset(const std::string& dataset) {
    NetworkSpec s;
    if (dataset == "mnist") {
        s.in_channels = 1;
        s.in_h = 28;
        s.in_w = 28;
        s.conv_kernel = 5;
        s.conv_channels = 12;
        s.fc_neurons = 6400;
    } else if (dataset == "fashion") {
        s.in_channels = 1;
        s.in_h = 28;
        s.in_w = 28;
        s.conv_kernel = 3;
        s.conv_channels = 64;
        s.fc_neurons = 6400;
    } else if (dataset == "cifar10") {
        s.in_channels = 3;
        s.in_h = 32;
        s.in_w = 32;
        s.conv_kernel = 5;
        s.conv_channels = 64;
        s.fc_neurons = 3200;
    } else {
        throw config_error("unknown dataset '" + dataset + "'");
    }
    return s;
}

std::string RunConfig::flat_json() const {
    json out;
    out["data.dataset"] = dataset;
    out["data.dir"] = data_dir;
    out["run.out"] = out_dir;
    out["run.seed"] = seed;
    out["run.threads"] = threads;
    out["run.per_class"] = per_class;
    out["train.conv_epochs"] = conv_epochs;
    out["train.fc_epochs"] = fc_epochs;
    const json net_json = json::parse(net.canonical_json());
    for (const auto& [k, v] : net_json.items()) out["net." + k] = v;
    return out.dump(2);
}

void apply_config_text(RunConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid run config JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("run config must be a JSON object with dotted keys");

    json net_overrides = json::object();
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "data.dataset") cfg.dataset = value.get<std::string>();
            else if (key == "data.dir") cfg.data_dir = value.get<std::string>();
            else if (key == "run.out") cfg.out_dir = value.get<std::string>();
            else if (key == "run.seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "run.threads") cfg.threads = value.get<int>();
            else if (key == "run.per_class") cfg.per_class = value.get<int>();
            else if (key == "train.conv_epochs") cfg.conv_epochs = value.get<int>();
            else if (key == "train.fc_epochs") cfg.fc_epochs = value.get<int>();
            else if (key.rfind("net.", 0) == 0) net_overrides[key.substr(4)] = value;
            else throw config_error("unknown config key: '" + key + "'");
        } catch (const json::exception& e) {
            throw config_error("bad value for config key '" + key + "': " + e.what());
        }
    }
    if (!net_overrides.empty()) {
        // merge over the current network spec, with key validation
        json merged = json::parse(cfg.net.canonical_json());
        for (const auto& [k, v] : net_overrides.items()) {
            if (!merged.contains(k)) throw config_error("unknown config key: 'net." + k + "'");
            merged[k] = v;
        }
        cfg.net = NetworkSpec::from_json_text(merged.dump());
    }
}

RunConfig load_run_config(const std::string& dataset_flag, const std::string& config_path) {
    // pass 1: the dataset choice decides the preset
    std::string file_text;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw config_error("cannot open config file: " + config_path);
        std::ostringstream ss;
        ss << f.rdbuf();
        file_text = ss.str();
        json j;
        try {
            j = json::parse(file_text);
        } catch (const json::exception& e) {
            throw config_error(std::string("invalid run config JSON: ") + e.what());
        }
        (void)j;
    }

    RunConfig cfg;
    if (!dataset_flag.empty()) cfg.dataset = dataset_flag;
    if (!file_text.empty()) {
        const json j = json::parse(file_text);
        if (j.contains("data.dataset") && dataset_flag.empty())
            cfg.dataset = j.at("data.dataset").get<std::string>();
    }
    cfg.net = dataset_preset(cfg.dataset);
    if (!file_text.empty()) apply_config_text(cfg, file_text);
    if (!dataset_flag.empty()) cfg.dataset = dataset_flag; // flag wins over file
    return cfg;
}

} // namespace spikeplast
