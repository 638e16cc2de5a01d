#include "spikeplast/neuron.hpp"

#include <cmath>

namespace spikeplast {

namespace {

[[noreturn]] void divergence(const char* layer_tag, std::size_t idx, double value) {
    throw numeric_fault(std::string("non-finite membrane potential in layer '") + layer_tag +
                        "' at neuron " + std::to_string(idx) + " (value " +
                        std::to_string(value) + ")");
}

} // namespace

void lif_step(std::span<double> u, std::span<std::uint8_t> fired,
              std::span<const double> current, double threshold,
              const NeuronConfig& cfg, const char* layer_tag) {
    const double d = cfg.decay();
    const double inv_c = 1.0 / cfg.capacitance;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        double next = d * u[i] + current[i] * inv_c;
        if (!std::isfinite(next)) divergence(layer_tag, i, next);
        if (next >= threshold) {
            u[i] = 0.0;
            fired[i] = 1;
        } else {
            u[i] = next;
            fired[i] = 0;
        }
    }
}

void lif_step(std::span<double> u, std::span<std::uint8_t> fired,
              std::span<const double> current, std::span<const double> threshold,
              const NeuronConfig& cfg, const char* layer_tag) {
    const double d = cfg.decay();
    const double inv_c = 1.0 / cfg.capacitance;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        double next = d * u[i] + current[i] * inv_c;
        if (!std::isfinite(next)) divergence(layer_tag, i, next);
        if (next >= threshold[i]) {
            u[i] = 0.0;
            fired[i] = 1;
        } else {
            u[i] = next;
            fired[i] = 0;
        }
    }
}

void lif_decay_only(std::span<double> u, std::span<std::uint8_t> fired,
                    const NeuronConfig& cfg) {
    const double d = cfg.decay();
    for (double& x : u) x *= d;
    std::fill(fired.begin(), fired.end(), 0);
}

} // namespace spikeplast
