#ifndef SPIKEPLAST_PLASTICITY_HPP
#define SPIKEPLAST_PLASTICITY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "spikeplast/common.hpp"

namespace spikeplast {

// Eligibility traces: x <- lambda_plus * x + pre, one row per sample.
// Presynaptic activity is whatever drives the layer -- binary spikes or
// direct-encoded currents in [0, 1]; both accumulate the same way.
struct TraceState {
    int samples = 0;
    int inputs = 0;
    double lambda_plus = 0.99;
    std::vector<double> x; // [samples][inputs]

    TraceState() = default;
    TraceState(int samples_, int inputs_, double lambda)
        : samples(samples_), inputs(inputs_), lambda_plus(lambda),
          x(static_cast<std::size_t>(samples_) * inputs_, 0.0) {}

    std::span<const double> row(int s) const {
        return {x.data() + static_cast<std::size_t>(s) * inputs, static_cast<std::size_t>(inputs)};
    }

    void reset() { std::fill(x.begin(), x.end(), 0.0); }

    // One decay-and-accumulate step over the whole batch; `pre` has the same
    // [samples][inputs] layout.
    void step(std::span<const double> pre);
};

struct StdpConfig {
    double x_offset = 0.3;    // potentiation/depression pivot
    double lambda_plus = 0.99;
    int n_batch = 32;         // samples per weight update
    int t_batch = 30;         // timesteps per weight update

    void validate() const {
        if (x_offset < 0.0) throw config_error("StdpConfig: x_offset must be >= 0");
        if (!(lambda_plus >= 0.0 && lambda_plus < 1.0))
            throw config_error("StdpConfig: lambda_plus must be in [0, 1)");
        if (n_batch < 1 || t_batch < 1)
            throw config_error("StdpConfig: n_batch and t_batch must be positive");
    }
};

// Pending weight changes for one sample-temporal batch window.
struct UpdateAccumulator {
    std::vector<double> delta_w;              // same layout as the weights
    std::vector<std::int64_t> contribution_count; // per postsynaptic neuron

    UpdateAccumulator() = default;
    UpdateAccumulator(std::size_t weights, std::size_t post_neurons)
        : delta_w(weights, 0.0), contribution_count(post_neurons, 0) {}

    bool empty() const;
    void clear();
};

// Dense fully connected accumulation: every postsynaptic neuron that fired at
// this (sample, timestep) collects (trace - x_offset) across its whole fan-in.
// post_spikes has layout [samples][out_neurons]; delta_w is [out][inputs].
void accumulate_stdp(UpdateAccumulator& acc, const TraceState& trace,
                     std::span<const std::uint8_t> post_spikes, int out_neurons,
                     double x_offset);

// w += delta_w / (n_batch * t_batch), then the accumulator is cleared.
// An empty accumulator (no postsynaptic spikes in the window) is a no-op;
// returns false so the caller can log it.
bool apply_stb_update(std::span<double> weights, UpdateAccumulator& acc, const StdpConfig& cfg);

// Per postsynaptic neuron j: w_j <- a_minus_fc * w_j / mean(w_j).
// A vanishing mean is a degenerate neuron and faults with its index.
void normalize_fc(std::span<double> weights, int out_neurons, int inputs, double a_minus_fc);

// Per output channel: w <- a_minus_conv * (w - mean) / std, statistics over
// the kernel's elements (population std). A constant kernel faults.
void normalize_conv(std::span<double> weights, int out_channels, int kernel_elems,
                    double a_minus_conv);

// Brute-force pair-window reference for one synapse: for every postsynaptic
// spike, sum a_plus * exp(-dt / tau_plus) over earlier presynaptic spikes
// (dt > 0 only) and subtract x_offset once per postsynaptic spike.
// Used by property tests against the trace recurrence; not a training path.
double window_stdp_oracle(std::span<const int> pre_spike_times,
                          std::span<const int> post_spike_times,
                          double a_plus, double tau_plus, double x_offset);

} // namespace spikeplast

#endif // SPIKEPLAST_PLASTICITY_HPP
