#include "pcad/geom/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "pcad/error.hpp"
#include "pcad/geom/spatial_index.hpp"

namespace pcad {

void LabeledCloud::validate() const {
  const std::string who = sample_id.empty() ? std::string("cloud") : "cloud '" + sample_id + "'";
  if (points.empty()) fail_data(who + " has no points");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].allFinite()) fail_data(who + ": point " + std::to_string(i) + " is not finite");
  if (has_normals()) {
    if (normals.size() != points.size())
      fail_data(who + ": " + std::to_string(normals.size()) + " normals for " +
                std::to_string(points.size()) + " points");
    for (std::size_t i = 0; i < normals.size(); ++i)
      if (!normals[i].allFinite() || std::abs(normals[i].norm() - 1.0) > 1e-6)
        fail_data(who + ": normal " + std::to_string(i) + " is not a unit vector");
  }
  if (has_labels()) {
    if (labels.size() != points.size())
      fail_data(who + ": " + std::to_string(labels.size()) + " labels for " +
                std::to_string(points.size()) + " points");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] > 1) fail_data(who + ": label " + std::to_string(i) + " is not 0 or 1");
  }
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return points.empty() ? c : Vec3(c / static_cast<double>(points.size()));
}

double median_spacing(std::span<const Vec3> points) {
  if (points.size() < 2) return 0.0;
  SpatialIndex index(points);
  std::vector<double> d(points.size());
#pragma omp parallel
  {
    std::vector<Neighbor> nb;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < points.size(); ++i) {
      index.knn_into(points[i], 2, nb);
      d[i] = nb[0].index == i ? nb[1].distance : nb[0].distance;
    }
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace pcad
