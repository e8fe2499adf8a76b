#pragma once

#include <cmath>
#include <cstdint>

namespace carq {

// Counter-based generator: one independent stream per packet index, derived
// from the master seed. Sharding work over packets is reproducible for any
// worker count because a packet's draws depend only on (seed, packet index,
// draw index).
class PacketRng {
public:
    PacketRng(std::uint64_t seed, std::uint64_t packet_index)
        : state_(mix(seed ^ mix(packet_index + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Strictly inside (0,1): safe for log().
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Inverse-CDF exponential with the given mean.
    double next_exponential(double mean) { return -mean * std::log(next_uniform()); }

    bool next_bernoulli(double p) { return next_uniform() < p; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace carq
