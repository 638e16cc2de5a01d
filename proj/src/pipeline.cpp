#include "spikeplast/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace spikeplast {

namespace {

std::uint64_t stream_index(std::uint64_t phase, std::uint64_t epoch, std::uint64_t batch) {
    return (phase << 48) | (epoch << 28) | batch;
}

std::vector<int> shuffled_indices(int n, std::uint64_t seed, std::uint64_t phase, std::uint64_t epoch) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(seed, RngStream::shuffle, stream_index(phase, epoch, 0));
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = bounded_draw(rng, i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

void encode_batch(const RawDataset& data, std::span<const int> order, std::size_t begin,
                  std::size_t end, std::vector<double>& out) {
    const std::size_t stride = static_cast<std::size_t>(data.sample_size());
    out.resize((end - begin) * stride);
    for (std::size_t k = begin; k < end; ++k)
        direct_encode(data.image(order[k]), {out.data() + (k - begin) * stride, stride});
}

void check_weights_finite(std::span<const double> w, const std::string& where) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!std::isfinite(w[i]))
            throw numeric_fault("non-finite weight after update in " + where + " (index " +
                                std::to_string(i) + "); aborting");
}

void log_line(const TrainOptions& opts, const std::string& msg) {
    if (opts.log) opts.log(msg);
}

// Draw transcripts for frozen per-sample inference. Evaluation treats each
// sample as an independent presentation (batch of one), so the randomness is
// keyed by sample index alone and results do not depend on worker count.
std::vector<double> sample_draws(std::uint64_t seed, RngStream stream, std::uint64_t index,
                                 int timesteps) {
    auto rng = make_rng(seed, stream, index);
    std::vector<double> d(static_cast<std::size_t>(timesteps));
    for (double& x : d) x = unit_draw(rng);
    return d;
}

} // namespace

void frozen_conv_rates_for_dataset(const Network& net, const AdaptiveFlags& flags,
                                   const RawDataset& data, std::uint64_t seed, int threads,
                                   std::vector<double>& rates_out) {
    const int features = net.spec.features();
    const std::size_t stride = static_cast<std::size_t>(features);
    rates_out.assign(static_cast<std::size_t>(data.n) * stride, 0.0);
    parallel_for(static_cast<std::size_t>(data.n), threads, [&](std::size_t lo, std::size_t hi) {
        const std::size_t in_stride = static_cast<std::size_t>(data.sample_size());
        std::vector<double> x(in_stride);
        for (std::size_t i = lo; i < hi; ++i) {
            direct_encode(data.image(static_cast<int>(i)), x);
            const auto draws = sample_draws(seed, RngStream::wta_conv_frozen, i, net.spec.timesteps);
            conv_rates(net, flags, x, 1, draws,
                       {rates_out.data() + i * stride, stride}, 1);
        }
    });
}

namespace {

void train_conv_phase(Network& net, const RawDataset& train, const TrainOptions& opts) {
    const NetworkSpec& spec = net.spec;
    const AdaptiveFlags flags = spec.flags();
    const ConvGeometry g = net.conv.geom;
    const int out_n = g.out_neurons();

    UpdateAccumulator acc(net.conv.weights.size(), static_cast<std::size_t>(g.out_channels));
    for (int epoch = 0; epoch < opts.conv_epochs; ++epoch) {
        const auto order = shuffled_indices(train.n, opts.seed, /*phase=*/0,
                                            static_cast<std::uint64_t>(epoch));
        std::size_t batch_idx = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += spec.n_batch, ++batch_idx) {
            const std::size_t end = std::min(order.size(), begin + spec.n_batch);
            const int samples = static_cast<int>(end - begin);

            std::vector<double> x;
            encode_batch(train, order, begin, end, x);

            TraceState trace(samples, g.in_neurons(), spec.lambda_plus);
            MembraneState mem(static_cast<std::size_t>(samples) * out_n);
            SpikeTensor winners(samples, out_n);
            ConvDrive drive;
            refresh_conv_drive(net.conv, flags, x, samples, drive, opts.threads);
            int empty_windows = 0;

            auto wta_rng = make_rng(opts.seed, RngStream::wta_train,
                                    stream_index(0, static_cast<std::uint64_t>(epoch), batch_idx));
            std::vector<double> draws(static_cast<std::size_t>(samples));

            int window_steps = 0;
            for (int t = 0; t < spec.timesteps; ++t) {
                trace.step(x);
                for (double& d : draws) d = unit_draw(wta_rng);
                conv_layer_step(drive.integrated(flags.asf), drive.raw, drive.thresh,
                                drive.batch_max, net.conv.alpha_inh, flags.alic, samples, out_n,
                                mem, draws, net.conv.neuron, winners);
                accumulate_stdp_conv(acc, trace, g, winners, spec.x_offset);
                ++window_steps;
                if ((t + 1) % spec.t_batch == 0 || t + 1 == spec.timesteps) {
                    StdpConfig cfg{spec.x_offset, spec.lambda_plus, samples, window_steps};
                    if (apply_stb_update(net.conv.weights, acc, cfg)) {
                        normalize_conv(net.conv.weights, g.out_channels, g.fan_in(),
                                       spec.a_minus_conv);
                        refresh_conv_drive(net.conv, flags, x, samples, drive, opts.threads);
                    } else if (++empty_windows == 1) {
                        log_line(opts, "conv: empty update window(s) in batch " +
                                           std::to_string(batch_idx) + " (no postsynaptic spikes)");
                    }
                    window_steps = 0;
                }
            }
            try {
                check_weights_finite(net.conv.weights, "conv layer");
            } catch (const numeric_fault& e) {
                throw numeric_fault(std::string(e.what()) + " [epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(batch_idx) + ", first sample index " +
                                    std::to_string(order[begin]) + "]");
            }
        }
        if (opts.on_epoch) opts.on_epoch("conv", epoch, net);
        log_line(opts, "conv epoch " + std::to_string(epoch + 1) + "/" +
                           std::to_string(opts.conv_epochs) + " done");
    }
}

void train_fc_phase(Network& net, const RawDataset& train, const TrainOptions& opts) {
    const NetworkSpec& spec = net.spec;
    const AdaptiveFlags flags = spec.flags();
    const int features = spec.features();
    const int neurons = net.fc.neurons;

    // the convolutional layer is frozen from here on; cache its rates
    std::vector<double> rates;
    frozen_conv_rates_for_dataset(net, flags, train, opts.seed, opts.threads, rates);
    log_line(opts, "fc: cached frozen conv rates for " + std::to_string(train.n) + " samples");

    UpdateAccumulator acc(net.fc.weights.size(), static_cast<std::size_t>(neurons));
    for (int epoch = 0; epoch < opts.fc_epochs; ++epoch) {
        const auto order = shuffled_indices(train.n, opts.seed, /*phase=*/1,
                                            static_cast<std::uint64_t>(epoch));
        std::size_t batch_idx = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += spec.n_batch, ++batch_idx) {
            const std::size_t end = std::min(order.size(), begin + spec.n_batch);
            const int samples = static_cast<int>(end - begin);

            std::vector<double> x(static_cast<std::size_t>(samples) * features);
            for (std::size_t k = begin; k < end; ++k)
                std::copy_n(rates.data() + static_cast<std::size_t>(order[k]) * features, features,
                            x.data() + (k - begin) * features);

            TraceState trace(samples, features, spec.lambda_plus);
            MembraneState mem(static_cast<std::size_t>(samples) * neurons);
            SpikeTensor winners(samples, neurons);
            std::vector<std::int64_t> window_counts(static_cast<std::size_t>(neurons), 0);
            FcDrive drive;
            refresh_fc_drive(net.fc, flags, x, samples, drive, opts.threads);
            int empty_windows = 0;

            auto wta_rng = make_rng(opts.seed, RngStream::wta_train,
                                    stream_index(1, static_cast<std::uint64_t>(epoch), batch_idx));
            std::vector<double> draws(static_cast<std::size_t>(samples));

            int window_steps = 0;
            for (int t = 0; t < spec.timesteps; ++t) {
                trace.step(x);
                for (double& d : draws) d = unit_draw(wta_rng);
                fc_layer_step(drive.integrated(flags.asf_fc && flags.asf), drive.raw, drive.thresh,
                              drive.batch_max, net.fc.alpha_inh, flags.alic, flags.fc_competition,
                              samples, neurons, mem, draws, net.fc.neuron, winners);
                accumulate_stdp(acc, trace, winners.v, neurons, spec.x_offset);
                for (int s = 0; s < samples; ++s) {
                    auto row = winners.row(s);
                    for (int j = 0; j < neurons; ++j) window_counts[static_cast<std::size_t>(j)] += row[j];
                }
                ++window_steps;
                if ((t + 1) % spec.t_batch == 0 || t + 1 == spec.timesteps) {
                    StdpConfig cfg{spec.x_offset, spec.lambda_plus, samples, window_steps};
                    const bool applied = apply_stb_update(net.fc.weights, acc, cfg);
                    if (applied) {
                        // excitatory synapses: depression saturates at zero.
                        // Without the floor the per-neuron mean can cancel
                        // toward zero and mean-normalization diverges.
                        for (double& w : net.fc.weights) w = std::max(0.0, w);
                        normalize_fc(net.fc.weights, neurons, features, spec.a_minus_fc);
                    } else if (++empty_windows == 1) {
                        log_line(opts, "fc: empty update window(s) in batch " +
                                           std::to_string(batch_idx) + " (no postsynaptic spikes)");
                    }
                    if (flags.atb) atb_fc_update(net.fc, window_counts);
                    std::fill(window_counts.begin(), window_counts.end(), 0);
                    if (applied || (flags.asf_fc && flags.asf)) {
                        // currents (and any filtered drive) follow the weights
                        refresh_fc_drive(net.fc, flags, x, samples, drive, opts.threads);
                    } else if (flags.atb) {
                        net.fc.thresholds(drive.thresh); // only the thresholds moved
                    }
                    window_steps = 0;
                }
            }
            try {
                check_weights_finite(net.fc.weights, "fc layer");
            } catch (const numeric_fault& e) {
                throw numeric_fault(std::string(e.what()) + " [epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(batch_idx) + ", first sample index " +
                                    std::to_string(order[begin]) + "]");
            }
        }
        if (opts.on_epoch) opts.on_epoch("fc", epoch, net);
        log_line(opts, "fc epoch " + std::to_string(epoch + 1) + "/" +
                           std::to_string(opts.fc_epochs) + " done");
    }
}

} // namespace

Network train_layerwise(const NetworkSpec& spec, const RawDataset& train,
                        const TrainOptions& opts) {
    spec.validate();
    if (train.n == 0) throw config_error("train_layerwise: empty training set");
    if (train.sample_size() != spec.in_channels * spec.in_h * spec.in_w)
        throw config_error("train_layerwise: dataset shape does not match the network spec");
    Network net = make_network(spec, opts.seed);
    train_conv_phase(net, train, opts);
    train_fc_phase(net, train, opts);
    return net;
}

VotingTable assign_votes(const Network& net, const RawDataset& labeled,
                         const TrainOptions& opts) {
    const AdaptiveFlags flags = net.spec.flags();
    const int neurons = net.fc.neurons;
    const int features = net.spec.features();
    const int T = net.spec.timesteps;

    std::vector<double> rates;
    frozen_conv_rates_for_dataset(net, flags, labeled, opts.seed, opts.threads, rates);

    // per-sample spike counts, then a serial reduction in sample order
    std::vector<std::int64_t> counts(static_cast<std::size_t>(labeled.n) * neurons, 0);
    parallel_for(static_cast<std::size_t>(labeled.n), opts.threads,
                 [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i) {
                         const auto draws = sample_draws(opts.seed, RngStream::wta_fc_frozen, i, T);
                         fc_spike_counts(net, flags,
                                         {rates.data() + i * features, static_cast<std::size_t>(features)},
                                         1, draws,
                                         {counts.data() + i * neurons, static_cast<std::size_t>(neurons)},
                                         1);
                     }
                 });

    VotingTable votes;
    votes.assignment.assign(static_cast<std::size_t>(neurons), -1);
    votes.response.assign(static_cast<std::size_t>(neurons) * 10, 0.0);
    std::array<std::int64_t, 10> class_count{};
    for (int i = 0; i < labeled.n; ++i) ++class_count[labeled.labels[static_cast<std::size_t>(i)]];

    for (int i = 0; i < labeled.n; ++i) {
        const int cls = labeled.labels[static_cast<std::size_t>(i)];
        const std::int64_t* c = counts.data() + static_cast<std::size_t>(i) * neurons;
        for (int j = 0; j < neurons; ++j)
            votes.response[static_cast<std::size_t>(j) * 10 + cls] +=
                static_cast<double>(c[j]) / T;
    }
    for (int j = 0; j < neurons; ++j) {
        for (int cls = 0; cls < 10; ++cls)
            if (class_count[cls] > 0)
                votes.response[static_cast<std::size_t>(j) * 10 + cls] /=
                    static_cast<double>(class_count[cls]);
        double best = 0.0;
        int arg = -1;
        for (int cls = 0; cls < 10; ++cls) {
            const double r = votes.response_at(j, cls);
            if (r > best) {
                best = r;
                arg = cls;
            }
        }
        votes.assignment[static_cast<std::size_t>(j)] = arg; // stays -1 if silent everywhere
    }
    return votes;
}

int predict_from_counts(const VotingTable& votes, std::span<const std::int64_t> counts,
                        int timesteps) {
    std::array<double, 10> score{};
    std::array<std::int64_t, 10> members{};
    std::int64_t total = 0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        total += counts[j];
        const int cls = votes.assignment[j];
        if (cls < 0) continue;
        score[cls] += static_cast<double>(counts[j]) / timesteps;
        ++members[cls];
    }
    if (total == 0) return -1;
    int best = -1;
    double best_score = -1.0;
    for (int cls = 0; cls < 10; ++cls) {
        if (members[cls] == 0) continue;
        const double s = score[cls] / static_cast<double>(members[cls]);
        if (s > best_score) {
            best_score = s;
            best = cls;
        }
    }
    return best;
}

int predict(const Network& net, const VotingTable& votes,
            std::span<const double> image_currents, std::uint64_t seed, int threads) {
    const AdaptiveFlags flags = net.spec.flags();
    const int features = net.spec.features();
    const int T = net.spec.timesteps;
    std::vector<double> rates(static_cast<std::size_t>(features));
    const auto cdraws = sample_draws(seed, RngStream::wta_conv_frozen, 0, T);
    conv_rates(net, flags, image_currents, 1, cdraws, rates, threads);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(net.fc.neurons));
    const auto fdraws = sample_draws(seed, RngStream::wta_fc_frozen, 0, T);
    fc_spike_counts(net, flags, rates, 1, fdraws, counts, threads);
    return predict_from_counts(votes, counts, T);
}

MetricsRecord evaluate(const Network& net, const VotingTable& votes, const RawDataset& data,
                       const TrainOptions& opts, const std::string& split) {
    const auto t0 = std::chrono::steady_clock::now();
    const AdaptiveFlags flags = net.spec.flags();
    const int features = net.spec.features();
    const int neurons = net.fc.neurons;
    const int T = net.spec.timesteps;

    std::vector<double> rates;
    frozen_conv_rates_for_dataset(net, flags, data, opts.seed, opts.threads, rates);

    std::vector<int> pred(static_cast<std::size_t>(data.n), -1);
    parallel_for(static_cast<std::size_t>(data.n), opts.threads,
                 [&](std::size_t lo, std::size_t hi) {
                     std::vector<std::int64_t> counts(static_cast<std::size_t>(neurons));
                     for (std::size_t i = lo; i < hi; ++i) {
                         const auto draws = sample_draws(opts.seed, RngStream::wta_fc_frozen, i, T);
                         fc_spike_counts(net, flags,
                                         {rates.data() + i * features, static_cast<std::size_t>(features)},
                                         1, draws, counts, 1);
                         pred[i] = predict_from_counts(votes, counts, T);
                     }
                 });

    MetricsRecord rec;
    rec.split = split;
    std::array<std::int64_t, 10> class_total{};
    std::int64_t correct = 0;
    for (int i = 0; i < data.n; ++i) {
        const int truth = data.labels[static_cast<std::size_t>(i)];
        ++class_total[truth];
        const int p = pred[static_cast<std::size_t>(i)];
        if (p < 0) {
            ++rec.abstained[truth];
            continue;
        }
        ++rec.confusion[truth][p];
        if (p == truth) ++correct;
    }
    rec.accuracy = data.n > 0 ? static_cast<double>(correct) / data.n : 0.0;
    for (int c = 0; c < 10; ++c)
        rec.per_class[c] = class_total[c] > 0
                               ? static_cast<double>(rec.confusion[c][c]) / class_total[c]
                               : 0.0;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<MetricsRecord> run_ablation(const NetworkSpec& spec,
                                        const std::vector<AblationSetting>& settings,
                                        const RawDataset& train, const RawDataset& test,
                                        const TrainOptions& opts) {
    std::vector<MetricsRecord> out;
    out.reserve(settings.size());
    for (const auto& s : settings) {
        NetworkSpec cur = spec;
        cur.asf = spec.asf && s.asf;
        cur.alic = spec.alic && s.alic;
        cur.atb = spec.atb && s.atb;
        if (opts.log) opts.log("ablation '" + s.name + "': training");
        Network net = train_layerwise(cur, train, opts);
        VotingTable votes = assign_votes(net, train, opts);
        MetricsRecord rec = evaluate(net, votes, test, opts, s.name);
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace spikeplast
