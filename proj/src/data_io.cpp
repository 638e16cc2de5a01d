#include "spikeplast/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <filesystem>

namespace spikeplast {

namespace {

// gzopen reads plain files unchanged and inflates gzip members, which gives
// transparent .gz support with one code path.
std::vector<std::uint8_t> read_all(const std::string& path) {
    if (!std::filesystem::exists(path)) throw data_error("file not found: " + path);
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw data_error("cannot open: " + path);
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> buf;
    int got = 0;
    while ((got = gzread(f, buf.data(), buf.size())) > 0)
        out.insert(out.end(), buf.data(), buf.data() + got);
    const bool bad = got < 0;
    gzclose(f);
    if (bad) throw data_error("decompression error while reading: " + path);
    return out;
}

std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint64_t dataset_checksum(const RawDataset& d) {
    std::uint64_t h = fnv1a64({reinterpret_cast<const char*>(d.images.data()), d.images.size()});
    h ^= fnv1a64({reinterpret_cast<const char*>(d.labels.data()), d.labels.size()});
    return h;
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

} // namespace

RawDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_all(images_path);
    const auto lab = read_all(labels_path);

    if (img.size() < 4) throw data_error("truncated IDX image file: " + images_path);
    if (lab.size() < 4) throw data_error("truncated IDX label file: " + labels_path);

    const std::uint32_t img_magic = be32(img.data());
    if (img_magic != kIdxImagesMagic)
        throw data_error("wrong magic in IDX image file " + images_path + " (got 0x" +
                         [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", img_magic); return std::string(b); }() +
                         ", want 0x00000803)");
    const std::uint32_t lab_magic = be32(lab.data());
    if (lab_magic != kIdxLabelsMagic)
        throw data_error("wrong magic in IDX label file " + labels_path + " (got 0x" +
                         [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", lab_magic); return std::string(b); }() +
                         ", want 0x00000801)");
    if (img.size() < 16) throw data_error("truncated IDX image file: " + images_path);
    if (lab.size() < 8) throw data_error("truncated IDX label file: " + labels_path);

    const std::uint32_t n_img = be32(img.data() + 4);
    const std::uint32_t rows = be32(img.data() + 8);
    const std::uint32_t cols = be32(img.data() + 12);
    const std::uint32_t n_lab = be32(lab.data() + 4);

    if (n_img != n_lab)
        throw data_error("image/label count mismatch: " + std::to_string(n_img) + " images vs " +
                         std::to_string(n_lab) + " labels");
    const std::size_t want_img = 16 + static_cast<std::size_t>(n_img) * rows * cols;
    if (img.size() != want_img)
        throw data_error("truncated IDX image file " + images_path + ": have " +
                         std::to_string(img.size()) + " bytes, want " + std::to_string(want_img));
    if (lab.size() != 8 + static_cast<std::size_t>(n_lab))
        throw data_error("truncated IDX label file: " + labels_path);

    RawDataset d;
    d.n = static_cast<int>(n_img);
    d.channels = 1;
    d.h = static_cast<int>(rows);
    d.w = static_cast<int>(cols);
    d.images.assign(img.begin() + 16, img.end());
    d.labels.assign(lab.begin() + 8, lab.end());
    for (std::uint8_t l : d.labels)
        if (l > 9) throw data_error("label out of range [0,9] in " + labels_path);
    d.source = images_path;
    d.checksum = dataset_checksum(d);
    return d;
}

RawDataset load_cifar10(const std::vector<std::string>& batch_paths) {
    constexpr std::size_t kRecord = 3073;
    constexpr std::size_t kPixels = 3072;
    RawDataset d;
    d.channels = 3;
    d.h = 32;
    d.w = 32;
    for (const auto& path : batch_paths) {
        const auto bytes = read_all(path);
        if (bytes.empty() || bytes.size() % kRecord != 0)
            throw data_error("CIFAR-10 batch size " + std::to_string(bytes.size()) +
                             " not divisible by 3073-byte records: " + path);
        const std::size_t records = bytes.size() / kRecord;
        for (std::size_t r = 0; r < records; ++r) {
            const std::uint8_t* rec = bytes.data() + r * kRecord;
            if (rec[0] > 9) throw data_error("label out of range [0,9] in " + path);
            d.labels.push_back(rec[0]);
            d.images.insert(d.images.end(), rec + 1, rec + 1 + kPixels);
        }
        if (!d.source.empty()) d.source += ";";
        d.source += path;
    }
    d.n = static_cast<int>(d.labels.size());
    d.checksum = dataset_checksum(d);
    return d;
}

void direct_encode(std::span<const std::uint8_t> pixels, std::span<double> currents) {
    for (std::size_t i = 0; i < pixels.size(); ++i)
        currents[i] = static_cast<double>(pixels[i]) / 255.0;
}

EncodedSample direct_encode(const RawDataset& raw, int index) {
    EncodedSample e;
    e.currents.resize(static_cast<std::size_t>(raw.sample_size()));
    direct_encode(raw.image(index), e.currents);
    e.label = raw.labels[static_cast<std::size_t>(index)];
    return e;
}

RawDataset small_sample_subset(const RawDataset& raw, int per_class, std::uint64_t seed) {
    if (per_class < 1) throw config_error("small_sample_subset: per_class must be positive");
    std::array<std::vector<int>, 10> by_class;
    for (int i = 0; i < raw.n; ++i) by_class[raw.labels[static_cast<std::size_t>(i)]].push_back(i);
    for (int c = 0; c < 10; ++c)
        if (static_cast<int>(by_class[c].size()) < per_class)
            throw data_error("small_sample_subset: class " + std::to_string(c) + " has only " +
                             std::to_string(by_class[c].size()) + " samples, need " +
                             std::to_string(per_class));

    RawDataset out;
    out.channels = raw.channels;
    out.h = raw.h;
    out.w = raw.w;
    out.source = raw.source + " (subset " + std::to_string(per_class) + "/class)";
    for (int c = 0; c < 10; ++c) {
        auto rng = make_rng(seed, RngStream::subset, static_cast<std::uint64_t>(c));
        auto& pool = by_class[c];
        // partial Fisher-Yates: the first per_class entries are the draw
        for (int k = 0; k < per_class; ++k) {
            const std::size_t j = k + bounded_draw(rng, pool.size() - k);
            std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
            const int idx = pool[static_cast<std::size_t>(k)];
            auto im = raw.image(idx);
            out.images.insert(out.images.end(), im.begin(), im.end());
            out.labels.push_back(static_cast<std::uint8_t>(c));
        }
    }
    out.n = per_class * 10;
    out.checksum = fnv1a64({reinterpret_cast<const char*>(out.images.data()), out.images.size()});
    return out;
}

} // namespace spikeplast
