#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcad/geom/cloud.hpp"

namespace pcad {

/// Farthest point sampling. The first index is drawn uniformly from `seed`;
/// each later pick maximizes the distance to the selected set (lowest index
/// wins ties). Output is in selection order.
std::vector<std::uint32_t> farthest_point_sample(std::span<const Vec3> points, std::size_t g,
                                                 std::uint64_t seed);
std::vector<std::uint32_t> farthest_point_sample_from(std::span<const Vec3> points, std::size_t g,
                                                      std::uint32_t first);

/// The first index farthest_point_sample() will use for a given seed.
std::uint32_t fps_first_index(std::size_t n, std::uint64_t seed);

}  // namespace pcad
