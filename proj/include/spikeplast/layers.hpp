#ifndef SPIKEPLAST_LAYERS_HPP
#define SPIKEPLAST_LAYERS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "spikeplast/common.hpp"
#include "spikeplast/neuron.hpp"
#include "spikeplast/plasticity.hpp"

namespace spikeplast {

// Binary activity of one timestep, flat over (sample, neuron). The neuron
// axis is a flattened (channel, y, x) block for convolutional layers.
struct SpikeTensor {
    int samples = 0;
    int neurons = 0;
    std::vector<std::uint8_t> v;

    SpikeTensor() = default;
    SpikeTensor(int samples_, int neurons_)
        : samples(samples_), neurons(neurons_),
          v(static_cast<std::size_t>(samples_) * neurons_, 0) {}

    std::span<std::uint8_t> row(int s) {
        return {v.data() + static_cast<std::size_t>(s) * neurons, static_cast<std::size_t>(neurons)};
    }
    std::span<const std::uint8_t> row(int s) const {
        return {v.data() + static_cast<std::size_t>(s) * neurons, static_cast<std::size_t>(neurons)};
    }
    void clear() { std::fill(v.begin(), v.end(), 0); }
};

struct ConvGeometry {
    int in_channels = 1;
    int in_h = 28;
    int in_w = 28;
    int kernel = 5;
    int out_channels = 12;

    int out_h() const { return in_h - kernel + 1; }
    int out_w() const { return in_w - kernel + 1; }
    int fan_in() const { return in_channels * kernel * kernel; }
    int in_neurons() const { return in_channels * in_h * in_w; }
    int out_neurons() const { return out_channels * out_h() * out_w(); }

    void validate() const {
        if (in_channels < 1 || in_h < 1 || in_w < 1 || kernel < 1 || out_channels < 1)
            throw config_error("ConvGeometry: all dimensions must be positive");
        if (kernel > in_h || kernel > in_w)
            throw config_error("ConvGeometry: kernel larger than input (valid convolution, no padding)");
    }
};

// Kernel weights plus the adaptive-mechanism coefficients of the layer.
// The per-sample dynamic threshold is transient state computed from the
// input current each refresh, not stored here.
struct ConvLayerState {
    ConvGeometry geom;
    std::vector<double> weights; // [out_c][in_c][k][k]
    double beta_thresh = 1.0;
    double alpha_asf = 16.0;
    double beta_asf = 8.0;
    double alpha_inh = 1.625;
    NeuronConfig neuron;
};

// Dense weights plus homeostatic per-neuron threshold offsets.
struct FcLayerState {
    int inputs = 0;
    int neurons = 0;
    std::vector<double> weights;    // [neurons][inputs]
    std::vector<double> theta_plus; // >= 0, per neuron
    double theta_init = 10.0;
    double alpha_plus = 0.001;
    double gamma = 15.0;
    double alpha_inh = 1.625;
    double alpha_asf = 16.0; // used only when the fc filter switch is on
    double beta_asf = 8.0;
    NeuronConfig neuron;

    double threshold(int j) const { return theta_init + theta_plus[static_cast<std::size_t>(j)]; }
    void thresholds(std::span<double> out) const;
};

// Which adaptive mechanisms are active for a run (ablation switches).
struct AdaptiveFlags {
    bool asf = true;
    bool atb = true;
    bool alic = true;
    bool fc_competition = true; // WTA + ALIC on the fully connected layer
    bool asf_fc = false;        // current filtering on the fully connected layer
    double fixed_threshold = 10.0; // replaces dynamic thresholds when atb == false
};

// ---- forward primitives ----------------------------------------------------

// Valid cross-correlation, stride 1: out[s][oc][oy][ox] = sum over the kernel
// window of weights * input. Input may be binary spikes or direct-encoded
// currents in [0, 1].
void conv_forward_current(std::span<const double> weights, const ConvGeometry& g,
                          std::span<const double> input, int samples,
                          std::span<double> out_current);

// Dense current: out[s][j] = sum_k w[j][k] * input[s][k].
void fc_forward_current(std::span<const double> weights, int neurons, int inputs,
                        std::span<const double> input, int samples,
                        std::span<double> out_current);

// Per-sample adaptive threshold: beta_thresh * max over the sample's channels
// and positions. An all-zero (or non-positive) current yields a non-positive
// threshold; callers treat that timestep as silent rather than faulting.
double atb_conv_threshold(std::span<const double> sample_current, double beta_thresh);

// Sigmoid current reshaping relative to the dynamic threshold:
//   asf(i) = thresh / (1 + exp(-alpha * i / thresh + beta)),  output in (0, thresh).
// Must run after the threshold exists; thresh <= 0 faults.
double asf_value(double current, double thresh, double alpha_asf, double beta_asf);
void asf_filter(std::span<const double> current, double thresh, double alpha_asf,
                double beta_asf, std::span<double> out);

// Picks one firing neuron uniformly (via a pre-drawn unit uniform) and
// returns its index, or -1 if nothing fired.
int wta_select(std::span<const std::uint8_t> fired, double draw);

// Membrane suppression of non-winners driven above half the reference
// current. `reference_max` is the maximum input current over the whole batch;
// inhibition only happens at timesteps where the sample produced a winner
// (the winner is the inhibition source).
void alic_inhibit(std::span<double> u, std::span<const double> gate_current,
                  int winner, double reference_max, double alpha_inh);

// OR-pooling over non-overlapping 2x2 windows, one sample and timestep at a
// time. Odd trailing rows/columns are truncated.
void max_pool2x2_or(std::span<const std::uint8_t> in, int channels, int h, int w,
                    std::span<std::uint8_t> out);

inline int pooled_h(int h) { return h / 2; }
inline int pooled_w(int w) { return w / 2; }

// Per-sample firing rates in [0, 1]: counts divided by the sample's maximum
// count. An entirely silent sample maps to all zeros.
void spike_normalize(std::span<const std::int64_t> counts, std::int64_t timesteps,
                     std::span<double> rates);

// ---- per-timestep simulation steps -----------------------------------------

// One timestep of the convolutional layer over a batch. `drive` is the
// current actually integrated (ASF-filtered when enabled), `gate_current` the
// raw current used by the ALIC gate, `sample_threshold` one threshold per
// sample. Winner spikes land in `winners`.
void conv_layer_step(std::span<const double> drive, std::span<const double> gate_current,
                     std::span<const double> sample_threshold, double batch_max_current,
                     double alpha_inh, bool alic_on, int samples, int neurons,
                     MembraneState& mem, std::span<const double> wta_draws,
                     const NeuronConfig& cfg, SpikeTensor& winners);

// One timestep of the fully connected layer. Thresholds are per neuron
// (theta_init + theta_plus). When competition is off every firing neuron
// keeps its spike and no inhibition is applied.
void fc_layer_step(std::span<const double> drive, std::span<const double> gate_current,
                   std::span<const double> neuron_threshold, double batch_max_current,
                   double alpha_inh, bool alic_on, bool competition_on, int samples,
                   int neurons, MembraneState& mem, std::span<const double> wta_draws,
                   const NeuronConfig& cfg, SpikeTensor& winners);

// Homeostatic threshold update, once per sample-temporal batch:
// theta_plus += alpha_plus * spike_count, then if the maximum effective
// threshold exceeds gamma every offset drops by the excess (floored at 0).
void atb_fc_update(FcLayerState& fc, std::span<const std::int64_t> spike_counts);

// Trace STDP accumulation for the conv layer: a winner at (channel, oy, ox)
// collects (trace - x_offset) over its kernel window into that channel's
// delta, sharing weights across positions.
void accumulate_stdp_conv(UpdateAccumulator& acc, const TraceState& trace,
                          const ConvGeometry& g, const SpikeTensor& winners,
                          double x_offset);

} // namespace spikeplast

#endif // SPIKEPLAST_LAYERS_HPP
