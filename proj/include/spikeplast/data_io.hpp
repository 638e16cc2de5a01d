#ifndef SPIKEPLAST_DATA_IO_HPP
#define SPIKEPLAST_DATA_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikeplast/common.hpp"

namespace spikeplast {

struct RawDataset {
    int n = 0;
    int channels = 0;
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> images; // [n][c][h][w]
    std::vector<std::uint8_t> labels; // [n], values 0..9
    std::string source;
    std::uint64_t checksum = 0;

    int sample_size() const { return channels * h * w; }
    std::span<const std::uint8_t> image(int i) const {
        return {images.data() + static_cast<std::size_t>(i) * sample_size(),
                static_cast<std::size_t>(sample_size())};
    }
};

struct EncodedSample {
    std::vector<double> currents; // pixel / 255, injected at every timestep
    int label = -1;
};

// IDX-format pair (big-endian headers, magic 0x803 for images / 0x801 for
// labels). Gzip-compressed files are decompressed transparently.
RawDataset load_idx(const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batches: 3073-byte records, one label byte followed by
// 3072 channel-major R,G,B pixels.
RawDataset load_cifar10(const std::vector<std::string>& batch_paths);

// Direct encoding: constant-current injection of pixel / 255.
void direct_encode(std::span<const std::uint8_t> pixels, std::span<double> currents);
EncodedSample direct_encode(const RawDataset& raw, int index);

// Exactly per_class samples of every class, drawn uniformly without
// replacement; deterministic for a given seed.
RawDataset small_sample_subset(const RawDataset& raw, int per_class, std::uint64_t seed);

} // namespace spikeplast

#endif // SPIKEPLAST_DATA_IO_HPP
