#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace cmv {

/// Philox4x32-10 block function (Salmon et al., Random123).
/// Pure: the output depends only on (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A counter-based random stream keyed by (master seed, stream id).
///
/// Every draw is addressable: draw k of a stream is a pure function of
/// (seed, stream, k), so particles and driver paths can be generated in any
/// order or on any thread and still reproduce bit-for-bit.
///
/// Counter layout: words 0-1 hold the 64-bit block index, words 2-3 hold the
/// stream id. The top byte of the block index selects a lane, which keeps
/// independent families of draws (e.g. Gaussian increments and bridge
/// uniforms) of the same stream apart.
class RandomStream {
public:
    static constexpr std::uint64_t kLaneShift = 56;

    RandomStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t lane = 0) const;

    /// Two uniforms on the open interval (0,1) with 53 random bits each.
    std::pair<double, double> uniform_pair(std::uint64_t index, std::uint32_t lane = 0) const;
    double uniform(std::uint64_t k, std::uint32_t lane = 0) const;

    /// Standard normals by Box-Muller; draw k is component k%2 of pair k/2.
    std::pair<double, double> normal_pair(std::uint64_t index, std::uint32_t lane = 0) const;
    double normal(std::uint64_t k, std::uint32_t lane = 0) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Stream derivation from a single master seed.
struct RngPolicy {
    std::uint64_t master_seed = 0;

    RandomStream stream(std::uint64_t i) const { return {master_seed, i}; }
};

// Reserved stream ids. Particle i and driver path i both use stream i + 1, so
// a particle system and a driver ensemble built from the same seed share
// their Brownian increments.
inline constexpr std::uint64_t kInitialStream = 0;
inline constexpr std::uint64_t kCommonNoiseStream = 0xC0FFEE0000000000ULL;
inline constexpr std::uint64_t kAuxiliaryStream = 0xA0A0000000000000ULL;

inline std::uint64_t path_stream(std::uint64_t path_index) { return path_index + 1; }

inline constexpr std::uint32_t kGaussianLane = 0;
inline constexpr std::uint32_t kBridgeLane = 1;

}  // namespace cmv
