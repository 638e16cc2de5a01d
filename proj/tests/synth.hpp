#ifndef SPIKEPLAST_TESTS_SYNTH_HPP
#define SPIKEPLAST_TESTS_SYNTH_HPP

// Deterministic synthetic 10-class image set for integration tests: each
// class is an oriented bar plus a class-specific blob, jittered by one pixel
// and speckled with noise. Classes are separable but not trivially so.

#include <cmath>
#include <cstdint>

#include "spikeplast/common.hpp"
#include "spikeplast/data_io.hpp"

namespace spikeplast::synth {

inline RawDataset make_dataset(int per_class, int h, int w, std::uint64_t seed) {
    RawDataset d;
    d.n = per_class * 10;
    d.channels = 1;
    d.h = h;
    d.w = w;
    d.source = "synthetic";
    d.images.resize(static_cast<std::size_t>(d.n) * h * w, 0);
    d.labels.resize(static_cast<std::size_t>(d.n));

    auto rng = make_rng(seed, RngStream::subset, 0xabcdef);
    int idx = 0;
    for (int cls = 0; cls < 10; ++cls) {
        const double angle = cls * 0.314159265;
        const double cx0 = w / 2.0 + ((cls % 3) - 1) * (w / 8.0);
        const double cy0 = h / 2.0 + ((cls / 3 % 3) - 1) * (h / 8.0);
        for (int k = 0; k < per_class; ++k, ++idx) {
            d.labels[static_cast<std::size_t>(idx)] = static_cast<std::uint8_t>(cls);
            std::uint8_t* img = d.images.data() + static_cast<std::size_t>(idx) * h * w;
            const double jx = static_cast<double>(bounded_draw(rng, 3)) - 1.0;
            const double jy = static_cast<double>(bounded_draw(rng, 3)) - 1.0;
            const double gain = 0.75 + 0.25 * unit_draw(rng);
            const double cx = cx0 + jx, cy = cy0 + jy;
            const double dx = std::cos(angle), dy = std::sin(angle);
            // bar through (cx, cy)
            for (double t = -h * 0.35; t <= h * 0.35; t += 0.25) {
                const int x = static_cast<int>(std::lround(cx + t * dx));
                const int y = static_cast<int>(std::lround(cy + t * dy));
                for (int oy = -1; oy <= 1; ++oy)
                    for (int ox = -1; ox <= 1; ++ox) {
                        const int xx = x + ox, yy = y + oy;
                        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                        const double fall = (ox == 0 && oy == 0) ? 1.0 : 0.45;
                        auto& px = img[static_cast<std::size_t>(yy) * w + xx];
                        px = static_cast<std::uint8_t>(
                            std::min(255.0, std::max<double>(px, 255.0 * gain * fall)));
                    }
            }
            // class blob in a fixed corner direction
            const int bx = static_cast<int>(cx0 + (cls % 2 ? 1 : -1) * w / 4.0);
            const int by = static_cast<int>(cy0 + (cls % 4 < 2 ? 1 : -1) * h / 4.0);
            for (int oy = -1; oy <= 1; ++oy)
                for (int ox = -1; ox <= 1; ++ox) {
                    const int xx = bx + ox, yy = by + oy;
                    if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                    img[static_cast<std::size_t>(yy) * w + xx] =
                        static_cast<std::uint8_t>(255.0 * gain);
                }
            // speckle noise
            const int flips = (h * w) / 20;
            for (int f = 0; f < flips; ++f) {
                const std::size_t p = bounded_draw(rng, static_cast<std::uint64_t>(h) * w);
                img[p] = static_cast<std::uint8_t>(60 + bounded_draw(rng, 120));
            }
        }
    }
    d.checksum = fnv1a64({reinterpret_cast<const char*>(d.images.data()), d.images.size()});
    return d;
}

} // namespace spikeplast::synth

#endif // SPIKEPLAST_TESTS_SYNTH_HPP
