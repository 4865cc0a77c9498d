#pragma once

#include <cstdint>
#include <random>

namespace coopsense {

using RngStream = std::mt19937_64;

// Purpose tags keep stream lineages disjoint: two streams collide only if
// (seed, tag, index) collide.
enum class StreamTag : std::uint64_t {
    kTopology = 1,
    kMobility = 2,
    kSnapshot = 3,
    kSplit = 4,
    kPermutation = 5,
    kInit = 6,
    kShuffle = 7,
    kSvm = 8,
    kRepetition = 9,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
    return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(tag)) ^ index);
}

inline RngStream make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
    return RngStream(derive_seed(seed, tag, index));
}

}  // namespace coopsense
