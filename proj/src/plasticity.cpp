#include "spikeplast/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spikeplast {

void TraceState::step(std::span<const double> pre) {
    if (pre.size() != x.size())
        throw config_error("TraceState::step: pre size " + std::to_string(pre.size()) +
                           " does not match trace size " + std::to_string(x.size()));
    const double l = lambda_plus;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = l * x[i] + pre[i];
}

bool UpdateAccumulator::empty() const {
    return std::all_of(contribution_count.begin(), contribution_count.end(),
                       [](std::int64_t c) { return c == 0; });
}

void UpdateAccumulator::clear() {
    std::fill(delta_w.begin(), delta_w.end(), 0.0);
    std::fill(contribution_count.begin(), contribution_count.end(), 0);
}

void accumulate_stdp(UpdateAccumulator& acc, const TraceState& trace,
                     std::span<const std::uint8_t> post_spikes, int out_neurons,
                     double x_offset) {
    const std::size_t inputs = static_cast<std::size_t>(trace.inputs);
    if (acc.delta_w.size() != static_cast<std::size_t>(out_neurons) * inputs)
        throw config_error("accumulate_stdp: accumulator shape does not match fan-in");
    if (post_spikes.size() != static_cast<std::size_t>(trace.samples) * out_neurons)
        throw config_error("accumulate_stdp: post spike tensor shape mismatch");

    for (int s = 0; s < trace.samples; ++s) {
        const double* tr = trace.x.data() + static_cast<std::size_t>(s) * inputs;
        const std::uint8_t* post = post_spikes.data() + static_cast<std::size_t>(s) * out_neurons;
        for (int j = 0; j < out_neurons; ++j) {
            if (!post[j]) continue;
            double* dw = acc.delta_w.data() + static_cast<std::size_t>(j) * inputs;
            for (std::size_t k = 0; k < inputs; ++k) dw[k] += tr[k] - x_offset;
            acc.contribution_count[static_cast<std::size_t>(j)] += 1;
        }
    }
}

bool apply_stb_update(std::span<double> weights, UpdateAccumulator& acc, const StdpConfig& cfg) {
    if (weights.size() != acc.delta_w.size())
        throw config_error("apply_stb_update: weight/accumulator size mismatch");
    if (acc.empty()) {
        acc.clear();
        return false;
    }
    const double scale = 1.0 / (static_cast<double>(cfg.n_batch) * cfg.t_batch);
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += acc.delta_w[i] * scale;
    acc.clear();
    return true;
}

void normalize_fc(std::span<double> weights, int out_neurons, int inputs, double a_minus_fc) {
    if (weights.size() != static_cast<std::size_t>(out_neurons) * inputs)
        throw config_error("normalize_fc: weight shape mismatch");
    for (int j = 0; j < out_neurons; ++j) {
        double* w = weights.data() + static_cast<std::size_t>(j) * inputs;
        double mean = 0.0;
        for (int k = 0; k < inputs; ++k) mean += w[k];
        mean /= inputs;
        if (!(std::abs(mean) > 1e-12))
            throw numeric_fault("normalize_fc: degenerate neuron " + std::to_string(j) +
                                " (incoming-weight mean " + std::to_string(mean) + ")");
        const double scale = a_minus_fc / mean;
        for (int k = 0; k < inputs; ++k) w[k] *= scale;
    }
}

void normalize_conv(std::span<double> weights, int out_channels, int kernel_elems,
                    double a_minus_conv) {
    if (weights.size() != static_cast<std::size_t>(out_channels) * kernel_elems)
        throw config_error("normalize_conv: weight shape mismatch");
    for (int c = 0; c < out_channels; ++c) {
        double* w = weights.data() + static_cast<std::size_t>(c) * kernel_elems;
        double mean = 0.0;
        for (int k = 0; k < kernel_elems; ++k) mean += w[k];
        mean /= kernel_elems;
        double var = 0.0;
        for (int k = 0; k < kernel_elems; ++k) {
            const double d = w[k] - mean;
            var += d * d;
        }
        var /= kernel_elems;
        const double sd = std::sqrt(var);
        if (!(sd > 0.0))
            throw numeric_fault("normalize_conv: constant kernel in channel " + std::to_string(c));
        const double scale = a_minus_conv / sd;
        for (int k = 0; k < kernel_elems; ++k) w[k] = (w[k] - mean) * scale;
    }
}

double window_stdp_oracle(std::span<const int> pre_spike_times,
                          std::span<const int> post_spike_times,
                          double a_plus, double tau_plus, double x_offset) {
    double dw = 0.0;
    for (int t_post : post_spike_times) {
        double acc = 0.0;
        for (int t_pre : pre_spike_times) {
            const int dt = t_post - t_pre;
            if (dt > 0) acc += a_plus * std::exp(-static_cast<double>(dt) / tau_plus);
        }
        dw += acc - x_offset;
    }
    return dw;
}

} // namespace spikeplast
