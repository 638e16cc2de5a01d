#ifndef SPIKEPLAST_TESTS_ORACLES_HPP
#define SPIKEPLAST_TESTS_ORACLES_HPP

// Independent brute-force references used by the property tests: a
// per-(sample, timestep) unbatched STDP update and a dense scalar-loop LIF
// forward with no vectorization shortcuts. Deliberately written from the
// defining recurrences, sharing nothing with the optimized implementation
// except the pre-drawn winner-take-all transcript.

#include <cstdint>
#include <span>
#include <vector>

#include "spikeplast/layers.hpp"
#include "spikeplast/network.hpp"

namespace spikeplast::oracle {

// Small enough for exhaustive evaluation well under a second.
struct Scenario {
    bool is_conv = true;

    // conv topology (used when is_conv)
    ConvGeometry geom;

    // fc topology (used when !is_conv)
    int fc_inputs = 4;
    int fc_neurons = 4;
    std::vector<double> theta_plus; // per fc neuron

    std::vector<double> weights;
    std::vector<double> input; // [samples][inputs], constant over time
    int samples = 1;
    int timesteps = 10;

    AdaptiveFlags flags;
    double beta_thresh = 1.0;
    double alpha_asf = 16.0;
    double beta_asf = 8.0;
    double alpha_inh = 1.625;
    double theta_init = 10.0;
    NeuronConfig neuron;

    std::vector<double> wta_draws; // [timesteps][samples]

    int out_neurons() const {
        return is_conv ? geom.out_neurons() : fc_neurons;
    }
    int in_neurons() const {
        return is_conv ? geom.in_neurons() : fc_inputs;
    }
};

// Dense scalar reference of the full forward (ATB, ASF, LIF, WTA, ALIC),
// returning the winner raster as [timesteps][samples][out_neurons].
std::vector<std::uint8_t> dense_lif_raster(const Scenario& sc);

// Average of the per-(sample, timestep) eligibility-trace updates applied
// individually: for every postsynaptic spike in `post_raster`
// ([timesteps][samples][outputs]) add (trace - x_offset) over the fan-in,
// dividing the total by samples * timesteps.
std::vector<double> unbatched_stdp_mean(std::span<const double> pre, int samples, int inputs,
                                        std::span<const std::uint8_t> post_raster, int outputs,
                                        int timesteps, double lambda_plus, double x_offset);

} // namespace spikeplast::oracle

#endif // SPIKEPLAST_TESTS_ORACLES_HPP
