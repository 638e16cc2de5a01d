#ifndef SPIKEPLAST_NEURON_HPP
#define SPIKEPLAST_NEURON_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikeplast/common.hpp"

namespace spikeplast {

// Discrete-time leaky integrate-and-fire dynamics shared by all spiking
// layers:  u <- (1 - 1/tau) * u + i / C,  spike and reset to 0 when the
// updated potential reaches the threshold.
struct NeuronConfig {
    double tau_mem = 2.0;     // membrane time constant, > 1
    double capacitance = 1.0; // fixed 1
    double resistance = 1.0;  // enters the continuous form only; fixed 1

    double decay() const { return 1.0 - 1.0 / tau_mem; }

    void validate() const {
        if (!(tau_mem > 1.0))
            throw config_error("NeuronConfig: tau_mem must be > 1 (got " +
                               std::to_string(tau_mem) + ")");
        if (capacitance != 1.0 || resistance != 1.0)
            throw config_error("NeuronConfig: capacitance and resistance are fixed at 1");
    }
};

// Membrane potentials plus the fire flags of the current timestep, flat over
// (sample, neuron). Potentials may go negative under lateral inhibition;
// there is no floor.
struct MembraneState {
    std::vector<double> u;
    std::vector<std::uint8_t> fired;

    explicit MembraneState(std::size_t neurons = 0) : u(neurons, 0.0), fired(neurons, 0) {}

    void reset() {
        std::fill(u.begin(), u.end(), 0.0);
        std::fill(fired.begin(), fired.end(), 0);
    }
    std::size_t size() const { return u.size(); }
};

// One LIF timestep over a row of neurons with a shared threshold. Spikes are
// evaluated against the updated potential of the same step; firing neurons
// reset to exactly 0. Non-finite updated potentials abort with the index.
void lif_step(std::span<double> u, std::span<std::uint8_t> fired,
              std::span<const double> current, double threshold,
              const NeuronConfig& cfg, const char* layer_tag);

// Same step with a per-neuron threshold (fully connected layers).
void lif_step(std::span<double> u, std::span<std::uint8_t> fired,
              std::span<const double> current, std::span<const double> threshold,
              const NeuronConfig& cfg, const char* layer_tag);

// Decay-only step used when a layer is silent for the timestep (e.g. an
// all-zero input current with an adaptive threshold of 0 emits no spikes).
void lif_decay_only(std::span<double> u, std::span<std::uint8_t> fired,
                    const NeuronConfig& cfg);

} // namespace spikeplast

#endif // SPIKEPLAST_NEURON_HPP
