#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcad/geom/cloud.hpp"

namespace pcad {

struct Neighbor {
  std::uint32_t index;
  double distance;
};

/// Immutable kd-tree over a copy of the input points. Exact Euclidean kNN
/// and fixed-radius queries; results are ordered by (distance, index), so
/// ties go to the lowest index. Safe for concurrent queries.
class SpatialIndex {
 public:
  explicit SpatialIndex(std::span<const Vec3> points, std::size_t leaf_size = 12);

  std::size_t size() const { return points_.size(); }

  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;
  std::vector<Neighbor> radius(const Vec3& query, double r) const;

  /// Allocation-free variant for hot loops; `out` is overwritten.
  void knn_into(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const;

  /// Original point indices in tree (leaf) order.
  std::span<const std::uint32_t> tree_order() const { return order_; }

 private:
  struct Node {
    double lo[3];
    double hi[3];
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
  };
  struct Candidate {
    double d2;
    std::uint32_t index;
    bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_knn(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Candidate>& heap) const;
  void search_radius(std::int32_t node, const Vec3& q, double r2, std::vector<Candidate>& out) const;
  static double box_d2(const Node& n, const Vec3& q);

  std::vector<Vec3> points_;            // in tree order
  std::vector<std::uint32_t> order_;    // tree slot -> original index
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

SpatialIndex build_spatial_index(std::span<const Vec3> points);

/// k nearest neighbors of each point, excluding the point itself, as a
/// flat row-major table (n rows x k columns).
struct NeighborTable {
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;

  std::size_t rows() const { return k == 0 ? 0 : indices.size() / k; }
  std::span<const std::uint32_t> row(std::size_t i, std::size_t prefix) const {
    return {indices.data() + i * k, prefix};
  }
  std::span<const std::uint32_t> row(std::size_t i) const { return row(i, k); }
};

NeighborTable build_neighbor_table(std::span<const Vec3> points, const SpatialIndex& index, std::size_t k);

}  // namespace pcad
