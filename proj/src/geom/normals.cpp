#include "pcad/geom/normals.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "pcad/error.hpp"

namespace pcad {

namespace {

Vec3 canonical_sign(Vec3 n) {
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(n[a]) > std::abs(n[axis])) axis = a;
  return n[axis] < 0.0 ? Vec3(-n) : n;
}

Vec3 pca_normal(std::span<const Vec3> points, const std::vector<Neighbor>& nb) {
  Vec3 mean = Vec3::Zero();
  for (const auto& n : nb) mean += points[n.index];
  mean /= static_cast<double>(nb.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& n : nb) {
    const Vec3 d = points[n.index] - mean;
    cov.noalias() += d * d.transpose();
  }
  if (cov.trace() <= 0.0) return Vec3(0, 0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Vec3 normal = solver.eigenvectors().col(0);  // eigenvalues ascend
  const double len = normal.norm();
  if (!(len > 0.0) || !normal.allFinite()) return Vec3(0, 0, 1);
  return normal / len;
}

}  // namespace

std::vector<Vec3> estimate_normals(std::span<const Vec3> points, const SpatialIndex& index,
                                   std::size_t k) {
  if (k < 3) fail_usage("normal estimation needs k_neighbors >= 3");
  if (points.size() < k)
    fail_data("normal estimation needs at least " + std::to_string(k) + " points, got " +
              std::to_string(points.size()));
  const Vec3 c = centroid(points);
  std::vector<Vec3> normals(points.size());
#pragma omp parallel
  {
    std::vector<Neighbor> nb;
#pragma omp for schedule(dynamic, 256)
    for (std::size_t i = 0; i < points.size(); ++i) {
      index.knn_into(points[i], k, nb);
      Vec3 n = pca_normal(points, nb);
      if (nb.back().distance == 0.0) {
        normals[i] = n;  // degenerate neighborhood: fixed (0,0,1)
        continue;
      }
      const Vec3 to_centroid = c - points[i];
      const double dot = n.dot(to_centroid);
      if (std::abs(dot) <= 1e-9 * to_centroid.norm()) n = canonical_sign(n);
      else if (dot > 0.0) n = -n;
      normals[i] = n;
    }
  }
  return normals;
}

LabeledCloud estimate_normals(const LabeledCloud& cloud, std::size_t k) {
  cloud.validate();
  if (k < 3) fail_usage("normal estimation needs k_neighbors >= 3");
  if (cloud.size() < k)
    fail_data("normal estimation needs at least " + std::to_string(k) + " points, got " +
              std::to_string(cloud.size()));
  SpatialIndex index(cloud.points);
  LabeledCloud out = cloud;
  out.normals = estimate_normals(cloud.points, index, k);
  return out;
}

}  // namespace pcad
