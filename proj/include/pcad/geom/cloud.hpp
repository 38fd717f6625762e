#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pcad {

using Vec3 = Eigen::Vector3d;

/// A point cloud with optional unit normals and optional per-point
/// {0 = normal, 1 = anomalous} labels. Empty normals/labels mean "absent".
struct LabeledCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> labels;
  std::string sample_id;

  std::size_t size() const { return points.size(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws Error(data) when any invariant is broken.
  void validate() const;
};

/// Median distance from each point to its nearest other point.
double median_spacing(std::span<const Vec3> points);

Vec3 centroid(std::span<const Vec3> points);

}  // namespace pcad
