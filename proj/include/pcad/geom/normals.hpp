#pragma once

#include "pcad/geom/cloud.hpp"
#include "pcad/geom/spatial_index.hpp"

namespace pcad {

/// PCA normals from the k nearest points (the point included). Normals point
/// away from the cloud centroid; neighborhoods with zero covariance get
/// (0,0,1). When the centroid test is indecisive (normal perpendicular to the
/// centroid direction) the largest-magnitude component is made positive.
LabeledCloud estimate_normals(const LabeledCloud& cloud, std::size_t k_neighbors);
std::vector<Vec3> estimate_normals(std::span<const Vec3> points, const SpatialIndex& index,
                                   std::size_t k_neighbors);

}  // namespace pcad
