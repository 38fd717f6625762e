#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pcad {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view text);

/// Derives an independent stream seed from a master seed and a tag.
/// Every random decision in the pipeline goes through here so that a
/// sample's randomness depends only on (master seed, sample id, purpose).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace pcad
