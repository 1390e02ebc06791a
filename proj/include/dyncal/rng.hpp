#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dyncal {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a labeled substream of `seed`, e.g. derive_seed(master, "candidates", iter).
/// Distinct (label, index) pairs give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

inline Rng make_stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, label, index));
}

}  // namespace dyncal
