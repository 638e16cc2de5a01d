#include "spikeplast/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace spikeplast {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

// x86-64 hosts are little-endian; fields are written as in-memory bytes and
// the magic guards against foreign files.
template <class T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& f, const std::string& path) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw data_error("bad header: truncated checkpoint " + path);
    return v;
}

void put_doubles(std::ofstream& f, const std::vector<double>& v) {
    put(f, static_cast<std::uint64_t>(v.size()));
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::ifstream& f, const std::string& path) {
    const auto n = get<std::uint64_t>(f, path);
    std::vector<double> v(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw data_error("bad header: truncated checkpoint " + path);
    return v;
}

} // namespace

void save_checkpoint(const std::string& path, const Network& net, const VotingTable& votes,
                     std::uint64_t seed) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw data_error("cannot write checkpoint: " + path);
    f.write(kMagic, sizeof kMagic);
    put(f, kVersion);
    put(f, net.spec.spec_hash());
    put(f, seed);
    const std::string spec_json = net.spec.canonical_json();
    put(f, static_cast<std::uint32_t>(spec_json.size()));
    f.write(spec_json.data(), static_cast<std::streamsize>(spec_json.size()));

    put_doubles(f, net.conv.weights);
    put_doubles(f, net.fc.weights);
    put_doubles(f, net.fc.theta_plus);

    put(f, static_cast<std::uint64_t>(votes.assignment.size()));
    for (int a : votes.assignment) put(f, static_cast<std::int32_t>(a));
    put_doubles(f, votes.response);
    if (!f) throw data_error("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open checkpoint: " + path);
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw data_error("bad header: not a checkpoint file: " + path);
    const auto version = get<std::uint32_t>(f, path);
    if (version != kVersion)
        throw data_error("bad header: unsupported checkpoint version " + std::to_string(version));
    const auto stored_hash = get<std::uint64_t>(f, path);
    const auto seed = get<std::uint64_t>(f, path);
    const auto json_len = get<std::uint32_t>(f, path);
    std::string spec_json(json_len, '\0');
    f.read(spec_json.data(), json_len);
    if (!f) throw data_error("bad header: truncated checkpoint " + path);

    Checkpoint ck;
    ck.seed = seed;
    NetworkSpec spec = NetworkSpec::from_json_text(spec_json);
    if (spec.spec_hash() != stored_hash)
        throw data_error("bad header: spec hash mismatch in " + path);
    ck.net = make_network(spec, seed);

    auto conv_w = get_doubles(f, path);
    auto fc_w = get_doubles(f, path);
    auto theta = get_doubles(f, path);
    if (conv_w.size() != ck.net.conv.weights.size() || fc_w.size() != ck.net.fc.weights.size() ||
        theta.size() != ck.net.fc.theta_plus.size())
        throw data_error("bad header: tensor sizes do not match stored spec in " + path);
    ck.net.conv.weights = std::move(conv_w);
    ck.net.fc.weights = std::move(fc_w);
    ck.net.fc.theta_plus = std::move(theta);

    const auto n_assign = get<std::uint64_t>(f, path);
    ck.votes.assignment.resize(n_assign);
    for (auto& a : ck.votes.assignment) a = get<std::int32_t>(f, path);
    ck.votes.response = get_doubles(f, path);
    if (!ck.votes.assignment.empty() &&
        (ck.votes.assignment.size() != static_cast<std::size_t>(ck.net.fc.neurons) ||
         ck.votes.response.size() != ck.votes.assignment.size() * 10))
        throw data_error("bad header: voting table does not match stored spec in " + path);
    return ck;
}

} // namespace spikeplast
