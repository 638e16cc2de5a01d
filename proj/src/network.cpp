#include "spikeplast/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace spikeplast {

void NetworkSpec::validate() const {
    conv_geometry().validate();
    if (fc_neurons < 1) throw config_error("NetworkSpec: fc_neurons must be positive");
    if (timesteps < 1) throw config_error("NetworkSpec: timesteps must be >= 1");
    if (!(conv_tau > 1.0) || !(fc_tau > 1.0))
        throw config_error("NetworkSpec: membrane time constants must be > 1");
    if (!(lambda_plus >= 0.0 && lambda_plus < 1.0))
        throw config_error("NetworkSpec: lambda_plus must be in [0, 1)");
    if (x_offset < 0.0) throw config_error("NetworkSpec: x_offset must be >= 0");
    if (n_batch < 1 || t_batch < 1)
        throw config_error("NetworkSpec: n_batch and t_batch must be positive");
    if (!(a_minus_fc > 0.0) || !(a_minus_conv > 0.0))
        throw config_error("NetworkSpec: normalization scales must be positive");
    if (!(beta_thresh > 0.0)) throw config_error("NetworkSpec: beta_thresh must be positive");
    if (!(alpha_asf > 0.0)) throw config_error("NetworkSpec: alpha_asf must be positive");
    if (!(theta_init > 0.0)) throw config_error("NetworkSpec: theta_init must be positive");
    if (alpha_plus < 0.0) throw config_error("NetworkSpec: alpha_plus must be >= 0");
    if (!(gamma >= theta_init))
        throw config_error("NetworkSpec: gamma must be >= theta_init (threshold ceiling)");
    if (alpha_inh < 0.0) throw config_error("NetworkSpec: alpha_inh must be >= 0");
    if (feature_h() < 1 || feature_w() < 1)
        throw config_error("NetworkSpec: pooled feature map is empty");
}

namespace {

using nlohmann::json;

json spec_to_json(const NetworkSpec& s) {
    return json{
        {"in_channels", s.in_channels},
        {"in_h", s.in_h},
        {"in_w", s.in_w},
        {"conv_kernel", s.conv_kernel},
        {"conv_channels", s.conv_channels},
        {"fc_neurons", s.fc_neurons},
        {"timesteps", s.timesteps},
        {"conv_tau", s.conv_tau},
        {"fc_tau", s.fc_tau},
        {"lambda_plus", s.lambda_plus},
        {"x_offset", s.x_offset},
        {"n_batch", s.n_batch},
        {"t_batch", s.t_batch},
        {"a_minus_fc", s.a_minus_fc},
        {"a_minus_conv", s.a_minus_conv},
        {"beta_thresh", s.beta_thresh},
        {"alpha_asf", s.alpha_asf},
        {"beta_asf", s.beta_asf},
        {"alpha_inh", s.alpha_inh},
        {"theta_init", s.theta_init},
        {"alpha_plus", s.alpha_plus},
        {"gamma", s.gamma},
        {"asf", s.asf},
        {"atb", s.atb},
        {"alic", s.alic},
        {"fc_competition", s.fc_competition},
        {"asf_fc", s.asf_fc},
    };
}

} // namespace

std::string NetworkSpec::canonical_json() const {
    return spec_to_json(*this).dump();
}

NetworkSpec NetworkSpec::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid network spec JSON: ") + e.what());
    }
    NetworkSpec s;
    const json defaults = spec_to_json(s);
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key))
            throw config_error("unknown network spec key: '" + key + "'");
        (void)value;
    }
    auto geti = [&](const char* k, int cur) { return j.contains(k) ? j.at(k).get<int>() : cur; };
    auto getd = [&](const char* k, double cur) { return j.contains(k) ? j.at(k).get<double>() : cur; };
    auto getb = [&](const char* k, bool cur) { return j.contains(k) ? j.at(k).get<bool>() : cur; };
    s.in_channels = geti("in_channels", s.in_channels);
    s.in_h = geti("in_h", s.in_h);
    s.in_w = geti("in_w", s.in_w);
    s.conv_kernel = geti("conv_kernel", s.conv_kernel);
    s.conv_channels = geti("conv_channels", s.conv_channels);
    s.fc_neurons = geti("fc_neurons", s.fc_neurons);
    s.timesteps = geti("timesteps", s.timesteps);
    s.conv_tau = getd("conv_tau", s.conv_tau);
    s.fc_tau = getd("fc_tau", s.fc_tau);
    s.lambda_plus = getd("lambda_plus", s.lambda_plus);
    s.x_offset = getd("x_offset", s.x_offset);
    s.n_batch = geti("n_batch", s.n_batch);
    s.t_batch = geti("t_batch", s.t_batch);
    s.a_minus_fc = getd("a_minus_fc", s.a_minus_fc);
    s.a_minus_conv = getd("a_minus_conv", s.a_minus_conv);
    s.beta_thresh = getd("beta_thresh", s.beta_thresh);
    s.alpha_asf = getd("alpha_asf", s.alpha_asf);
    s.beta_asf = getd("beta_asf", s.beta_asf);
    s.alpha_inh = getd("alpha_inh", s.alpha_inh);
    s.theta_init = getd("theta_init", s.theta_init);
    s.alpha_plus = getd("alpha_plus", s.alpha_plus);
    s.gamma = getd("gamma", s.gamma);
    s.asf = getb("asf", s.asf);
    s.atb = getb("atb", s.atb);
    s.alic = getb("alic", s.alic);
    s.fc_competition = getb("fc_competition", s.fc_competition);
    s.asf_fc = getb("asf_fc", s.asf_fc);
    return s;
}

Network make_network(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Network net;
    net.spec = spec;

    const ConvGeometry g = spec.conv_geometry();
    net.conv.geom = g;
    net.conv.beta_thresh = spec.beta_thresh;
    net.conv.alpha_asf = spec.alpha_asf;
    net.conv.beta_asf = spec.beta_asf;
    net.conv.alpha_inh = spec.alpha_inh;
    net.conv.neuron.tau_mem = spec.conv_tau;
    net.conv.neuron.validate();

    net.fc.inputs = spec.features();
    net.fc.neurons = spec.fc_neurons;
    net.fc.theta_init = spec.theta_init;
    net.fc.alpha_plus = spec.alpha_plus;
    net.fc.gamma = spec.gamma;
    net.fc.alpha_inh = spec.alpha_inh;
    net.fc.alpha_asf = spec.alpha_asf;
    net.fc.beta_asf = spec.beta_asf;
    net.fc.neuron.tau_mem = spec.fc_tau;
    net.fc.neuron.validate();
    net.fc.theta_plus.assign(static_cast<std::size_t>(spec.fc_neurons), 0.0);

    auto rng = make_rng(seed, RngStream::weight_init);
    net.conv.weights.resize(static_cast<std::size_t>(g.out_channels) * g.fan_in());
    for (double& w : net.conv.weights) w = unit_draw(rng);
    normalize_conv(net.conv.weights, g.out_channels, g.fan_in(), spec.a_minus_conv);

    net.fc.weights.resize(static_cast<std::size_t>(net.fc.neurons) * net.fc.inputs);
    for (double& w : net.fc.weights) w = unit_draw(rng);
    normalize_fc(net.fc.weights, net.fc.neurons, net.fc.inputs, spec.a_minus_fc);

    return net;
}

// ---- frozen-weight simulation ------------------------------------------------

void refresh_conv_drive(const ConvLayerState& conv, const AdaptiveFlags& flags,
                        std::span<const double> input, int samples, ConvDrive& d, int threads) {
    const int n = conv.geom.out_neurons();
    d.raw.resize(static_cast<std::size_t>(samples) * n);
    d.thresh.resize(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t lo, std::size_t hi) {
        const std::size_t in_stride = static_cast<std::size_t>(conv.geom.in_neurons());
        for (std::size_t s = lo; s < hi; ++s) {
            conv_forward_current(conv.weights, conv.geom,
                                 input.subspan(s * in_stride, in_stride), 1,
                                 std::span<double>(d.raw.data() + s * n, static_cast<std::size_t>(n)));
        }
    });
    for (int s = 0; s < samples; ++s) {
        std::span<const double> row(d.raw.data() + static_cast<std::size_t>(s) * n,
                                    static_cast<std::size_t>(n));
        d.thresh[static_cast<std::size_t>(s)] =
            flags.atb ? atb_conv_threshold(row, conv.beta_thresh) : flags.fixed_threshold;
    }
    d.batch_max = 0.0;
    bool first = true;
    for (double c : d.raw) {
        if (first || c > d.batch_max) d.batch_max = c;
        first = false;
    }
    if (flags.asf) {
        d.drive.resize(d.raw.size());
        for (int s = 0; s < samples; ++s) {
            const double th = d.thresh[static_cast<std::size_t>(s)];
            std::span<const double> row(d.raw.data() + static_cast<std::size_t>(s) * n,
                                        static_cast<std::size_t>(n));
            std::span<double> out(d.drive.data() + static_cast<std::size_t>(s) * n,
                                  static_cast<std::size_t>(n));
            if (th > 0.0)
                asf_filter(row, th, conv.alpha_asf, conv.beta_asf, out);
            else
                std::fill(out.begin(), out.end(), 0.0); // silent sample, never integrated
        }
    }
}

void refresh_fc_drive(const FcLayerState& fc, const AdaptiveFlags& flags,
                      std::span<const double> rates, int samples, FcDrive& d, int threads) {
    const int n = fc.neurons;
    d.raw.resize(static_cast<std::size_t>(samples) * n);
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t lo, std::size_t hi) {
        const std::size_t in_stride = static_cast<std::size_t>(fc.inputs);
        for (std::size_t s = lo; s < hi; ++s) {
            fc_forward_current(fc.weights, fc.neurons, fc.inputs,
                               rates.subspan(s * in_stride, in_stride), 1,
                               std::span<double>(d.raw.data() + s * n, static_cast<std::size_t>(n)));
        }
    });
    d.thresh.resize(static_cast<std::size_t>(n));
    if (flags.atb) {
        fc.thresholds(d.thresh);
    } else {
        std::fill(d.thresh.begin(), d.thresh.end(), flags.fixed_threshold);
    }
    d.batch_max = 0.0;
    bool first = true;
    for (double c : d.raw) {
        if (first || c > d.batch_max) d.batch_max = c;
        first = false;
    }
    if (flags.asf_fc && flags.asf) {
        d.drive.resize(d.raw.size());
        for (int s = 0; s < samples; ++s) {
            for (int j = 0; j < n; ++j) {
                const std::size_t idx = static_cast<std::size_t>(s) * n + j;
                d.drive[idx] = asf_value(d.raw[idx], d.thresh[static_cast<std::size_t>(j)],
                                         fc.alpha_asf, fc.beta_asf);
            }
        }
    }
}

void simulate_conv_frozen(const ConvLayerState& conv, const AdaptiveFlags& flags,
                          std::span<const double> input, int samples, int timesteps,
                          std::span<const double> wta_draws,
                          const std::function<void(int, const SpikeTensor&)>& on_spikes,
                          int threads) {
    const int n = conv.geom.out_neurons();
    if (wta_draws.size() != static_cast<std::size_t>(timesteps) * samples)
        throw config_error("simulate_conv_frozen: draw transcript shape mismatch");
    ConvDrive d;
    refresh_conv_drive(conv, flags, input, samples, d, threads);
    std::span<const double> drive = d.integrated(flags.asf);
    MembraneState mem(static_cast<std::size_t>(samples) * n);
    SpikeTensor winners(samples, n);
    for (int t = 0; t < timesteps; ++t) {
        conv_layer_step(drive, d.raw, d.thresh, d.batch_max, conv.alpha_inh, flags.alic, samples,
                        n, mem, wta_draws.subspan(static_cast<std::size_t>(t) * samples,
                                                  static_cast<std::size_t>(samples)),
                        conv.neuron, winners);
        on_spikes(t, winners);
    }
}

void simulate_fc_frozen(const FcLayerState& fc, const AdaptiveFlags& flags,
                        std::span<const double> rates, int samples, int timesteps,
                        std::span<const double> wta_draws,
                        const std::function<void(int, const SpikeTensor&)>& on_spikes,
                        int threads) {
    const int n = fc.neurons;
    if (wta_draws.size() != static_cast<std::size_t>(timesteps) * samples)
        throw config_error("simulate_fc_frozen: draw transcript shape mismatch");
    FcDrive d;
    refresh_fc_drive(fc, flags, rates, samples, d, threads);
    std::span<const double> drive = d.integrated(flags.asf_fc && flags.asf);
    MembraneState mem(static_cast<std::size_t>(samples) * n);
    SpikeTensor winners(samples, n);
    for (int t = 0; t < timesteps; ++t) {
        fc_layer_step(drive, d.raw, d.thresh, d.batch_max, fc.alpha_inh, flags.alic,
                      flags.fc_competition, samples, n, mem,
                      wta_draws.subspan(static_cast<std::size_t>(t) * samples,
                                        static_cast<std::size_t>(samples)),
                      fc.neuron, winners);
        on_spikes(t, winners);
    }
}

void conv_rates(const Network& net, const AdaptiveFlags& flags, std::span<const double> input,
                int samples, std::span<const double> wta_draws, std::span<double> rates_out,
                int threads) {
    const ConvGeometry g = net.conv.geom;
    const int oh = g.out_h(), ow = g.out_w();
    const int ph = pooled_h(oh), pw = pooled_w(ow);
    const int features = g.out_channels * ph * pw;
    if (rates_out.size() != static_cast<std::size_t>(samples) * features)
        throw config_error("conv_rates: output shape mismatch");

    std::vector<std::int64_t> counts(static_cast<std::size_t>(samples) * features, 0);
    std::vector<std::uint8_t> pooled(static_cast<std::size_t>(features));
    simulate_conv_frozen(
        net.conv, flags, input, samples, net.spec.timesteps, wta_draws,
        [&](int, const SpikeTensor& winners) {
            for (int s = 0; s < samples; ++s) {
                max_pool2x2_or(winners.row(s), g.out_channels, oh, ow, pooled);
                std::int64_t* c = counts.data() + static_cast<std::size_t>(s) * features;
                for (int k = 0; k < features; ++k) c[k] += pooled[static_cast<std::size_t>(k)];
            }
        },
        threads);

    for (int s = 0; s < samples; ++s) {
        spike_normalize(
            std::span<const std::int64_t>(counts.data() + static_cast<std::size_t>(s) * features,
                                          static_cast<std::size_t>(features)),
            net.spec.timesteps,
            rates_out.subspan(static_cast<std::size_t>(s) * features,
                              static_cast<std::size_t>(features)));
    }
}

void fc_spike_counts(const Network& net, const AdaptiveFlags& flags,
                     std::span<const double> rates, int samples,
                     std::span<const double> wta_draws, std::span<std::int64_t> counts_out,
                     int threads) {
    const int n = net.fc.neurons;
    if (counts_out.size() != static_cast<std::size_t>(samples) * n)
        throw config_error("fc_spike_counts: output shape mismatch");
    std::fill(counts_out.begin(), counts_out.end(), 0);
    simulate_fc_frozen(
        net.fc, flags, rates, samples, net.spec.timesteps, wta_draws,
        [&](int, const SpikeTensor& winners) {
            for (std::size_t i = 0; i < winners.v.size(); ++i) counts_out[i] += winners.v[i];
        },
        threads);
}

} // namespace spikeplast
