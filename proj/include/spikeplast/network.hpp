#ifndef SPIKEPLAST_NETWORK_HPP
#define SPIKEPLAST_NETWORK_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spikeplast/layers.hpp"

namespace spikeplast {

// Architecture plus every dynamics hyperparameter of a run. Serialized
// canonically for config files, checkpoints, and the spec hash.
struct NetworkSpec {
    // topology
    int in_channels = 1;
    int in_h = 28;
    int in_w = 28;
    int conv_kernel = 5;
    int conv_channels = 12;
    int fc_neurons = 6400;
    int timesteps = 300;

    // membrane time constants (per layer; the paper never fixes them)
    double conv_tau = 300.0;
    double fc_tau = 100.0;

    // plasticity
    double lambda_plus = 0.99;
    double x_offset = 0.3;
    int n_batch = 32;
    int t_batch = 30;
    double a_minus_fc = 0.01;
    double a_minus_conv = 1.0;

    // adaptive mechanisms
    double beta_thresh = 1.0;
    double alpha_asf = 16.0;
    double beta_asf = 8.0;
    double alpha_inh = 0.4;
    double theta_init = 10.0;
    double alpha_plus = 0.001;
    double gamma = 15.0;

    // switches
    bool asf = true;
    bool atb = true;
    bool alic = true;
    bool fc_competition = true;
    bool asf_fc = false;

    ConvGeometry conv_geometry() const {
        return ConvGeometry{in_channels, in_h, in_w, conv_kernel, conv_channels};
    }
    int feature_h() const { return pooled_h(conv_geometry().out_h()); }
    int feature_w() const { return pooled_w(conv_geometry().out_w()); }
    int features() const { return conv_channels * feature_h() * feature_w(); }

    AdaptiveFlags flags() const {
        return AdaptiveFlags{asf, atb, alic, fc_competition, asf_fc, theta_init};
    }

    void validate() const;

    // One-level JSON object with stable key order; doubles printed exactly.
    std::string canonical_json() const;
    std::uint64_t spec_hash() const { return fnv1a64(canonical_json()); }

    static NetworkSpec from_json_text(const std::string& text);
};

struct Network {
    NetworkSpec spec;
    ConvLayerState conv;
    FcLayerState fc;
};

// Seeds kernels and dense weights from U[0,1) and applies the respective
// normalization once, so the initial state already satisfies the
// post-update invariants.
Network make_network(const NetworkSpec& spec, std::uint64_t seed);

// ---- drive state ---------------------------------------------------------------

// Input currents, thresholds, and the ALIC reference of one batch; constant
// between weight updates, so recomputed only when weights change.
struct ConvDrive {
    std::vector<double> raw;    // [samples][out_neurons]
    std::vector<double> drive;  // ASF-filtered currents (when enabled)
    std::vector<double> thresh; // per sample
    double batch_max = 0.0;

    std::span<const double> integrated(bool asf_on) const {
        return asf_on ? std::span<const double>(drive) : std::span<const double>(raw);
    }
};

struct FcDrive {
    std::vector<double> raw;
    std::vector<double> drive;
    std::vector<double> thresh; // per neuron
    double batch_max = 0.0;

    std::span<const double> integrated(bool asf_fc_on) const {
        return asf_fc_on ? std::span<const double>(drive) : std::span<const double>(raw);
    }
};

void refresh_conv_drive(const ConvLayerState& conv, const AdaptiveFlags& flags,
                        std::span<const double> input, int samples, ConvDrive& d,
                        int threads = 1);
void refresh_fc_drive(const FcLayerState& fc, const AdaptiveFlags& flags,
                      std::span<const double> rates, int samples, FcDrive& d,
                      int threads = 1);

// ---- frozen-weight simulation ------------------------------------------------

// Simulates the convolutional layer for `timesteps` with frozen weights and
// constant input currents, invoking `on_spikes` with the winner tensor of
// every step. `wta_draws` is a pre-drawn [timesteps][samples] transcript so
// reference implementations can replay identical randomness.
void simulate_conv_frozen(const ConvLayerState& conv, const AdaptiveFlags& flags,
                          std::span<const double> input, int samples, int timesteps,
                          std::span<const double> wta_draws,
                          const std::function<void(int, const SpikeTensor&)>& on_spikes,
                          int threads = 1);

// Same for the fully connected layer over constant rate inputs.
void simulate_fc_frozen(const FcLayerState& fc, const AdaptiveFlags& flags,
                        std::span<const double> rates, int samples, int timesteps,
                        std::span<const double> wta_draws,
                        const std::function<void(int, const SpikeTensor&)>& on_spikes,
                        int threads = 1);

// Frozen conv pass -> per-timestep 2x2 OR pooling -> per-sample normalized
// rates in [0, 1]; the feature vector fed to the fully connected layer.
void conv_rates(const Network& net, const AdaptiveFlags& flags, std::span<const double> input,
                int samples, std::span<const double> wta_draws, std::span<double> rates_out,
                int threads = 1);

// Frozen fc pass -> per-neuron spike counts over the presentation.
void fc_spike_counts(const Network& net, const AdaptiveFlags& flags,
                     std::span<const double> rates, int samples,
                     std::span<const double> wta_draws, std::span<std::int64_t> counts_out,
                     int threads = 1);

} // namespace spikeplast

#endif // SPIKEPLAST_NETWORK_HPP
