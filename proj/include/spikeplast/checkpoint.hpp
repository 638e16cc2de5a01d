#ifndef SPIKEPLAST_CHECKPOINT_HPP
#define SPIKEPLAST_CHECKPOINT_HPP

#include <string>

#include "spikeplast/network.hpp"
#include "spikeplast/pipeline.hpp"

namespace spikeplast {

// Versioned binary container: header (magic, format version, spec hash,
// seed), the canonical spec JSON, raw little-endian weight tensors, the
// theta_plus vector, and the voting table. Round-trips bitwise.
struct Checkpoint {
    Network net;
    VotingTable votes;
    std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const Network& net, const VotingTable& votes,
                     std::uint64_t seed);

// Throws data_error with "bad header" for unrecognized or corrupt files.
Checkpoint load_checkpoint(const std::string& path);

} // namespace spikeplast

#endif // SPIKEPLAST_CHECKPOINT_HPP
