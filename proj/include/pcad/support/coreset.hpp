#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcad/config.hpp"
#include "pcad/support/feature_set.hpp"

namespace pcad {

/// First index the greedy selectors use for a given seed.
std::uint32_t greedy_first_index(std::size_t n, std::uint64_t seed);

/// Greedy k-center selection: seeded first pick, then repeatedly the vector
/// farthest from the selected set (lowest index on ties). Selection order.
std::vector<std::uint32_t> greedy_coreset(const FeatureSet& features, std::size_t k, std::uint64_t seed);
std::vector<std::uint32_t> greedy_coreset_from(const FeatureSet& features, std::size_t k, std::uint32_t first);

/// Gaussian projection matrix (out_dim x in_dim, row-major), entries / sqrt(out_dim).
std::vector<double> random_projection(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed);

/// Greedy selection run on projected images; indices refer to the originals.
std::vector<std::uint32_t> greedy_coreset_projected(const FeatureSet& features, std::size_t k,
                                                    std::size_t proj_dim, std::uint64_t seed);
std::vector<std::uint32_t> greedy_coreset_with_projection(const FeatureSet& features, std::size_t k,
                                                          std::span<const double> projection,
                                                          std::size_t proj_dim, std::uint64_t seed);

/// max over rows of the distance to the nearest selected row.
double coverage_radius(const FeatureSet& features, std::span<const std::uint32_t> selected);

/// Seeded uniform sample without replacement, ascending order.
std::vector<std::uint32_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed);

/// Index selection for one of the single-pool strategies. `correspondence`
/// is not a single-pool strategy and is rejected.
std::vector<std::uint32_t> select_indices(const FeatureSet& features, std::size_t k, Strategy strategy,
                                          std::uint64_t seed, std::size_t proj_dim = 16);

}  // namespace pcad
