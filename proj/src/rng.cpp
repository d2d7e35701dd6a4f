#include "cmv/rng.hpp"

#include <cmath>
#include <numbers>

namespace cmv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::array<std::uint32_t, 4> RandomStream::block(std::uint64_t index, std::uint32_t lane) const {
    const std::uint64_t tagged = index ^ (static_cast<std::uint64_t>(lane) << kLaneShift);
    return philox4x32({static_cast<std::uint32_t>(tagged), static_cast<std::uint32_t>(tagged >> 32),
                       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::pair<double, double> RandomStream::uniform_pair(std::uint64_t index, std::uint32_t lane) const {
    const auto b = block(index, lane);
    return {to_open_unit(b[1], b[0]), to_open_unit(b[3], b[2])};
}

double RandomStream::uniform(std::uint64_t k, std::uint32_t lane) const {
    const auto p = uniform_pair(k / 2, lane);
    return (k % 2 == 0) ? p.first : p.second;
}

std::pair<double, double> RandomStream::normal_pair(std::uint64_t index, std::uint32_t lane) const {
    const auto [u1, u2] = uniform_pair(index, lane);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

double RandomStream::normal(std::uint64_t k, std::uint32_t lane) const {
    const auto p = normal_pair(k / 2, lane);
    return (k % 2 == 0) ? p.first : p.second;
}

}  // namespace cmv
