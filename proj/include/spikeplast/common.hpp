#ifndef SPIKEPLAST_COMMON_HPP
#define SPIKEPLAST_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spikeplast {

// Error taxonomy, mapped to process exit codes by the CLI:
//   config_error  -> invalid configuration / usage (exit 2)
//   data_error    -> malformed or missing input files (exit 1)
//   numeric_fault -> numerical divergence during simulation (exit 1)
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_fault : public std::runtime_error {
public:
    explicit numeric_fault(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Named substreams so every consumer of randomness draws from its own
// deterministic generator; results never depend on evaluation order
// between subsystems.
enum class RngStream : std::uint64_t {
    weight_init = 1,
    shuffle = 2,
    wta_train = 3,
    wta_conv_frozen = 4, // frozen-conv inference (rate extraction), by sample index
    wta_fc_frozen = 5,   // frozen-fc inference (voting / evaluation), by sample index
    subset = 6,
};

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
    s = splitmix64(s ^ index);
    return std::mt19937_64(s);
}

// Uniform draw in [0, 1) built directly from generator bits.
// std::uniform_real_distribution is implementation-defined, which would break
// the cross-run bitwise determinism contract.
inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Deterministic bounded draw in [0, n).
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    return rng() % n;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Runs fn(begin, end) over contiguous index blocks, one block per worker.
// Falls back to a direct call for a single thread or tiny ranges.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace spikeplast

#endif // SPIKEPLAST_COMMON_HPP
