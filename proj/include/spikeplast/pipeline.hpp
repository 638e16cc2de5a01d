#ifndef SPIKEPLAST_PIPELINE_HPP
#define SPIKEPLAST_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spikeplast/data_io.hpp"
#include "spikeplast/network.hpp"

namespace spikeplast {

struct TrainOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    int conv_epochs = 1;
    int fc_epochs = 3;
    std::function<void(const std::string&)> log;
    // called after each finished epoch ("conv" or "fc" phase) for checkpointing
    std::function<void(const std::string& phase, int epoch, const Network&)> on_epoch;
};

// Class readout learned from training-set responses; weights never see it.
struct VotingTable {
    std::vector<int> assignment;  // class per neuron, -1 = silent during voting
    std::vector<double> response; // [neurons][10] mean firing rate per class

    int neurons() const { return static_cast<int>(assignment.size()); }
    double response_at(int neuron, int cls) const {
        return response[static_cast<std::size_t>(neuron) * 10 + cls];
    }
};

struct MetricsRecord {
    int epoch = 0;
    std::string split;
    double accuracy = 0.0;
    std::array<double, 10> per_class{};
    std::array<std::array<std::int64_t, 10>, 10> confusion{}; // [true][predicted]
    std::array<std::int64_t, 10> abstained{}; // no-spike samples per true class
    double wall_seconds = 0.0;
};

// Layer-wise unsupervised training: the convolutional layer is trained to
// completion with sample-temporal batched STDP, then frozen; its normalized
// firing rates become the constant-current input for fully connected
// training. Labels are never touched here.
Network train_layerwise(const NetworkSpec& spec, const RawDataset& train,
                        const TrainOptions& opts);

// One frozen pass over labeled training data; per-neuron mean response per
// class, argmax assignment (ties to the lowest class).
VotingTable assign_votes(const Network& net, const RawDataset& labeled,
                         const TrainOptions& opts);

// Prediction = class whose assigned neurons respond strongest on average;
// -1 when the layer stays silent for the sample.
int predict_from_counts(const VotingTable& votes, std::span<const std::int64_t> counts,
                        int timesteps);
int predict(const Network& net, const VotingTable& votes,
            std::span<const double> image_currents, std::uint64_t seed, int threads = 1);

MetricsRecord evaluate(const Network& net, const VotingTable& votes, const RawDataset& data,
                       const TrainOptions& opts, const std::string& split);

// Normalized per-sample feature vectors of the frozen convolutional layer,
// indexed consistently with voting/evaluation randomness.
void frozen_conv_rates_for_dataset(const Network& net, const AdaptiveFlags& flags,
                                   const RawDataset& data, std::uint64_t seed, int threads,
                                   std::vector<double>& rates_out);

struct AblationSetting {
    std::string name;
    bool asf = true;
    bool alic = true;
    bool atb = true;
};

// Full train + vote + evaluate per setting; the sample-temporal batch update
// stays on throughout.
std::vector<MetricsRecord> run_ablation(const NetworkSpec& spec,
                                        const std::vector<AblationSetting>& settings,
                                        const RawDataset& train, const RawDataset& test,
                                        const TrainOptions& opts);

} // namespace spikeplast

#endif // SPIKEPLAST_PIPELINE_HPP
