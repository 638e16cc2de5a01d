#include "spikeplast/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spikeplast {

void FcLayerState::thresholds(std::span<double> out) const {
    for (int j = 0; j < neurons; ++j) out[j] = theta_init + theta_plus[static_cast<std::size_t>(j)];
}

void conv_forward_current(std::span<const double> weights, const ConvGeometry& g,
                          std::span<const double> input, int samples,
                          std::span<double> out_current) {
    const int oh = g.out_h(), ow = g.out_w();
    const std::size_t in_stride = static_cast<std::size_t>(g.in_neurons());
    const std::size_t out_stride = static_cast<std::size_t>(g.out_neurons());
    if (weights.size() != static_cast<std::size_t>(g.out_channels) * g.fan_in())
        throw config_error("conv_forward_current: weight shape mismatch");
    if (input.size() != in_stride * samples || out_current.size() != out_stride * samples)
        throw config_error("conv_forward_current: tensor shape mismatch");

    for (int s = 0; s < samples; ++s) {
        const double* x = input.data() + in_stride * s;
        double* out = out_current.data() + out_stride * s;
        for (int oc = 0; oc < g.out_channels; ++oc) {
            const double* wc = weights.data() + static_cast<std::size_t>(oc) * g.fan_in();
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = 0.0;
                    const double* w = wc;
                    for (int ic = 0; ic < g.in_channels; ++ic) {
                        const double* plane = x + static_cast<std::size_t>(ic) * g.in_h * g.in_w;
                        for (int ky = 0; ky < g.kernel; ++ky) {
                            const double* rowp = plane + static_cast<std::size_t>(oy + ky) * g.in_w + ox;
                            for (int kx = 0; kx < g.kernel; ++kx) acc += w[kx] * rowp[kx];
                            w += g.kernel;
                        }
                    }
                    out[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
                }
            }
        }
    }
}

void fc_forward_current(std::span<const double> weights, int neurons, int inputs,
                        std::span<const double> input, int samples,
                        std::span<double> out_current) {
    if (weights.size() != static_cast<std::size_t>(neurons) * inputs)
        throw config_error("fc_forward_current: weight shape mismatch");
    if (input.size() != static_cast<std::size_t>(samples) * inputs ||
        out_current.size() != static_cast<std::size_t>(samples) * neurons)
        throw config_error("fc_forward_current: tensor shape mismatch");

    for (int s = 0; s < samples; ++s) {
        const double* x = input.data() + static_cast<std::size_t>(s) * inputs;
        double* out = out_current.data() + static_cast<std::size_t>(s) * neurons;
        for (int j = 0; j < neurons; ++j) {
            const double* w = weights.data() + static_cast<std::size_t>(j) * inputs;
            double acc = 0.0;
            for (int k = 0; k < inputs; ++k) acc += w[k] * x[k];
            out[j] = acc;
        }
    }
}

double atb_conv_threshold(std::span<const double> sample_current, double beta_thresh) {
    double m = 0.0;
    bool first = true;
    for (double c : sample_current) {
        if (first || c > m) m = c;
        first = false;
    }
    return beta_thresh * m;
}

double asf_value(double current, double thresh, double alpha_asf, double beta_asf) {
    if (!(thresh > 0.0))
        throw config_error("asf_value: threshold must be positive (run after the threshold update)");
    const double sigma = -alpha_asf * (current / thresh) + beta_asf;
    return thresh / (1.0 + std::exp(sigma));
}

void asf_filter(std::span<const double> current, double thresh, double alpha_asf,
                double beta_asf, std::span<double> out) {
    if (!(thresh > 0.0))
        throw config_error("asf_filter: threshold must be positive (run after the threshold update)");
    for (std::size_t i = 0; i < current.size(); ++i) {
        const double sigma = -alpha_asf * (current[i] / thresh) + beta_asf;
        out[i] = thresh / (1.0 + std::exp(sigma));
    }
}

int wta_select(std::span<const std::uint8_t> fired, double draw) {
    int k = 0;
    for (std::uint8_t f : fired) k += f;
    if (k == 0) return -1;
    int pick = static_cast<int>(draw * k);
    if (pick >= k) pick = k - 1;
    for (std::size_t i = 0; i < fired.size(); ++i) {
        if (!fired[i]) continue;
        if (pick == 0) return static_cast<int>(i);
        --pick;
    }
    return -1; // unreachable
}

void alic_inhibit(std::span<double> u, std::span<const double> gate_current,
                  int winner, double reference_max, double alpha_inh) {
    if (winner < 0) return; // no spike source this timestep
    const double gate = reference_max / 2.0;
    const double amount = alpha_inh * reference_max;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (static_cast<int>(i) == winner) continue;
        if (gate_current[i] > gate) u[i] -= amount;
    }
}

void max_pool2x2_or(std::span<const std::uint8_t> in, int channels, int h, int w,
                    std::span<std::uint8_t> out) {
    const int ph = pooled_h(h), pw = pooled_w(w);
    for (int c = 0; c < channels; ++c) {
        const std::uint8_t* plane = in.data() + static_cast<std::size_t>(c) * h * w;
        std::uint8_t* op = out.data() + static_cast<std::size_t>(c) * ph * pw;
        for (int y = 0; y < ph; ++y) {
            for (int x = 0; x < pw; ++x) {
                const std::uint8_t* p = plane + static_cast<std::size_t>(2 * y) * w + 2 * x;
                op[static_cast<std::size_t>(y) * pw + x] =
                    static_cast<std::uint8_t>(p[0] | p[1] | p[w] | p[w + 1]);
            }
        }
    }
}

void spike_normalize(std::span<const std::int64_t> counts, std::int64_t timesteps,
                     std::span<double> rates) {
    std::int64_t m = 0;
    for (std::int64_t c : counts) {
        if (c > timesteps)
            throw config_error("spike_normalize: count " + std::to_string(c) +
                               " exceeds timestep budget " + std::to_string(timesteps));
        m = std::max(m, c);
    }
    if (m == 0) {
        std::fill(rates.begin(), rates.end(), 0.0);
        return;
    }
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < counts.size(); ++i)
        rates[i] = static_cast<double>(counts[i]) * inv;
}

void conv_layer_step(std::span<const double> drive, std::span<const double> gate_current,
                     std::span<const double> sample_threshold, double batch_max_current,
                     double alpha_inh, bool alic_on, int samples, int neurons,
                     MembraneState& mem, std::span<const double> wta_draws,
                     const NeuronConfig& cfg, SpikeTensor& winners) {
    winners.clear();
    for (int s = 0; s < samples; ++s) {
        const std::size_t off = static_cast<std::size_t>(s) * neurons;
        std::span<double> u(mem.u.data() + off, static_cast<std::size_t>(neurons));
        std::span<std::uint8_t> fired(mem.fired.data() + off, static_cast<std::size_t>(neurons));
        const double th = sample_threshold[s];
        if (!(th > 0.0)) {
            // silent sample: nothing can cross a non-positive adaptive threshold
            lif_decay_only(u, fired, cfg);
            continue;
        }
        lif_step(u, fired, drive.subspan(off, static_cast<std::size_t>(neurons)), th, cfg, "conv");
        const int winner = wta_select(fired, wta_draws[s]);
        if (winner >= 0) winners.row(s)[winner] = 1;
        if (alic_on)
            alic_inhibit(u, gate_current.subspan(off, static_cast<std::size_t>(neurons)), winner,
                         batch_max_current, alpha_inh);
    }
}

void fc_layer_step(std::span<const double> drive, std::span<const double> gate_current,
                   std::span<const double> neuron_threshold, double batch_max_current,
                   double alpha_inh, bool alic_on, bool competition_on, int samples,
                   int neurons, MembraneState& mem, std::span<const double> wta_draws,
                   const NeuronConfig& cfg, SpikeTensor& winners) {
    winners.clear();
    for (int s = 0; s < samples; ++s) {
        const std::size_t off = static_cast<std::size_t>(s) * neurons;
        std::span<double> u(mem.u.data() + off, static_cast<std::size_t>(neurons));
        std::span<std::uint8_t> fired(mem.fired.data() + off, static_cast<std::size_t>(neurons));
        lif_step(u, fired, drive.subspan(off, static_cast<std::size_t>(neurons)), neuron_threshold,
                 cfg, "fc");
        if (!competition_on) {
            std::copy(fired.begin(), fired.end(), winners.row(s).begin());
            continue;
        }
        const int winner = wta_select(fired, wta_draws[s]);
        if (winner >= 0) winners.row(s)[winner] = 1;
        if (alic_on)
            alic_inhibit(u, gate_current.subspan(off, static_cast<std::size_t>(neurons)), winner,
                         batch_max_current, alpha_inh);
    }
}

void atb_fc_update(FcLayerState& fc, std::span<const std::int64_t> spike_counts) {
    if (spike_counts.size() != static_cast<std::size_t>(fc.neurons))
        throw config_error("atb_fc_update: spike count vector shape mismatch");
    for (int j = 0; j < fc.neurons; ++j)
        fc.theta_plus[static_cast<std::size_t>(j)] +=
            fc.alpha_plus * static_cast<double>(spike_counts[j]);
    // rebalance in offset space so the ceiling holds exactly
    const double cap = fc.gamma - fc.theta_init;
    double max_tp = 0.0;
    for (double tp : fc.theta_plus) max_tp = std::max(max_tp, tp);
    if (max_tp > cap) {
        const double bias = max_tp - cap;
        for (double& tp : fc.theta_plus) tp = std::min(cap, std::max(0.0, tp - bias));
    }
}

void accumulate_stdp_conv(UpdateAccumulator& acc, const TraceState& trace,
                          const ConvGeometry& g, const SpikeTensor& winners,
                          double x_offset) {
    const int oh = g.out_h(), ow = g.out_w();
    if (acc.delta_w.size() != static_cast<std::size_t>(g.out_channels) * g.fan_in())
        throw config_error("accumulate_stdp_conv: accumulator shape mismatch");
    if (trace.inputs != g.in_neurons() || winners.neurons != g.out_neurons())
        throw config_error("accumulate_stdp_conv: trace/winner shape mismatch");

    for (int s = 0; s < winners.samples; ++s) {
        auto row = winners.row(s);
        // at most one winner per sample; scan for it
        for (int idx = 0; idx < winners.neurons; ++idx) {
            if (!row[idx]) continue;
            const int oc = idx / (oh * ow);
            const int oy = (idx / ow) % oh;
            const int ox = idx % ow;
            const double* tr = trace.x.data() + static_cast<std::size_t>(s) * trace.inputs;
            double* dw = acc.delta_w.data() + static_cast<std::size_t>(oc) * g.fan_in();
            for (int ic = 0; ic < g.in_channels; ++ic) {
                const double* plane = tr + static_cast<std::size_t>(ic) * g.in_h * g.in_w;
                for (int ky = 0; ky < g.kernel; ++ky) {
                    const double* trow = plane + static_cast<std::size_t>(oy + ky) * g.in_w + ox;
                    for (int kx = 0; kx < g.kernel; ++kx) *dw++ += trow[kx] - x_offset;
                }
            }
            acc.contribution_count[static_cast<std::size_t>(oc)] += 1;
        }
    }
}

} // namespace spikeplast
