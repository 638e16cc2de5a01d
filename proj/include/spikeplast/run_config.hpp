#ifndef SPIKEPLAST_RUN_CONFIG_HPP
#define SPIKEPLAST_RUN_CONFIG_HPP

#include <string>
#include <vector>

#include "spikeplast/network.hpp"

namespace spikeplast {

// Resolved run configuration. Serialized as one flat JSON object with dotted
// keys ("net.fc_neurons", "run.seed", ...) so run records diff cleanly.
// Resolution order: dataset preset, then config file, then CLI flags.
struct RunConfig {
    std::string dataset = "mnist"; // mnist | fashion | cifar10
    std::string data_dir;          // empty -> $SPIKEPLAST_DATA, else ./data
    std::string out_dir = "runs/latest";
    std::uint64_t seed = 1;
    int threads = 1;
    int per_class = 0; // 0 = full training set
    int conv_epochs = 1;
    int fc_epochs = 3;
    NetworkSpec net;

    std::string resolved_data_dir() const;
    std::string flat_json() const;

    void validate() const;
};

// Topology and hyperparameters reported for each dataset.
NetworkSpec dataset_preset(const std::string& dataset);

// Parse a flat-dotted-key JSON config into `cfg`; unknown keys are rejected.
void apply_config_text(RunConfig& cfg, const std::string& json_text);

RunConfig load_run_config(const std::string& dataset_flag, const std::string& config_path);

} // namespace spikeplast

#endif // SPIKEPLAST_RUN_CONFIG_HPP
