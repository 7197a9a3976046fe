#pragma once

#include <cstdint>

#include "bcva/jumps.hpp"

namespace bcva {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of the stream owned by (seed, path, stream id).
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(path + 0x632BE59BD9B4E019ULL));
    h = splitmix64(h ^ splitmix64(stream + 0x8CB92BA72F3D8DD7ULL));
    return h;
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream)
{
    return Rng(stream_seed(seed, path, stream));
}

} // namespace bcva
