#pragma once

// Serial brute-force versions of the library kernels. Used as test oracles
// and as the baseline in the benchmarks; not tuned for speed.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pcad/geom/cloud.hpp"
#include "pcad/support/feature_set.hpp"

namespace pcad::reference {

struct IndexedDistance {
  std::uint32_t index;
  double d2;
};

/// k nearest points by full sort on (squared distance, index).
std::vector<IndexedDistance> knn(std::span<const Vec3> points, const Vec3& query, std::size_t k);

/// Points within distance r, ordered by (distance, index).
std::vector<IndexedDistance> radius(std::span<const Vec3> points, const Vec3& query, double r);

/// Farthest point sampling evaluated from the definition each step:
/// argmax over unselected points of the min squared distance to the selection.
std::vector<std::uint32_t> fps(std::span<const Vec3> points, std::size_t g, std::uint32_t first);

/// Greedy k-center from the definition, with the library's feature metric.
std::vector<std::uint32_t> greedy(const FeatureSet& features, std::size_t k, std::uint32_t first);

/// PCA normal of a point from its k nearest neighbors (self included),
/// oriented away from the cloud centroid.
Vec3 normal(std::span<const Vec3> points, std::size_t i, std::size_t k);

/// SPFH of point s over explicit neighbors, computed angle by angle with
/// explicit frame vectors and bin edges.
std::array<double, 33> spfh(std::span<const Vec3> points, std::span<const Vec3> normals, std::size_t s,
                            std::span<const std::uint32_t> neighbors);

/// Single-scale FPFH for every point, neighbors from brute-force kNN.
std::vector<std::array<double, 33>> fpfh(std::span<const Vec3> points, std::span<const Vec3> normals,
                                         std::size_t k);

/// Pairwise Mann-Whitney count.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average precision from a sweep over every distinct threshold.
double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels);

double silhouette(const FeatureSet& features, std::span<const int> groups);

/// Reweighted distance with the neighborhood found by full sort.
double reweighted_distance(std::span<const float> f, std::size_t q, const FeatureSet& support, std::size_t K);

}  // namespace pcad::reference
