#include "pcad/geom/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcad/error.hpp"

namespace pcad {

namespace {

inline double sq_dist(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Max-heap replace-the-root with a single sift-down.
template <typename T>
void replace_top(std::vector<T>& heap, const T& value) {
  const std::size_t n = heap.size();
  std::size_t i = 0;
  while (true) {
    const std::size_t l = 2 * i + 1;
    if (l >= n) break;
    std::size_t c = l;
    if (l + 1 < n && heap[l] < heap[l + 1]) c = l + 1;
    if (!(value < heap[c])) break;
    heap[i] = heap[c];
    i = c;
  }
  heap[i] = value;
}

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points.empty()) fail_data("cannot build a spatial index over zero points");
  if (points.size() > 0xffffffffULL) fail_data("spatial index supports at most 2^32-1 points");
  for (const auto& p : points)
    if (!p.allFinite()) fail_data("spatial index input contains a non-finite point");
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points.size() / leaf_size_ + 2);
  std::vector<Vec3> src(points.begin(), points.end());
  points_ = src;  // scratch during build; rewritten in tree order below
  build(0, static_cast<std::uint32_t>(points.size()));
  for (std::size_t i = 0; i < order_.size(); ++i) points_[i] = src[order_[i]];
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  for (int a = 0; a < 3; ++a) {
    node.lo[a] = std::numeric_limits<double>::infinity();
    node.hi[a] = -std::numeric_limits<double>::infinity();
  }
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      node.lo[a] = std::min(node.lo[a], p[a]);
      node.hi[a] = std::max(node.hi[a], p[a]);
    }
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= leaf_size_) return id;

  int axis = 0;
  double extent = -1.0;
  for (int a = 0; a < 3; ++a) {
    if (node.hi[a] - node.lo[a] > extent) {
      extent = node.hi[a] - node.lo[a];
      axis = a;
    }
  }
  if (extent <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const std::int32_t l = build(begin, mid);
  const std::int32_t r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

double SpatialIndex::box_d2(const Node& n, const Vec3& q) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = 0.0;
    if (q[a] < n.lo[a]) d = n.lo[a] - q[a];
    else if (q[a] > n.hi[a]) d = q[a] - n.hi[a];
    d2 += d * d;
  }
  return d2;
}

void SpatialIndex::search_knn(std::int32_t id, const Vec3& q, std::size_t k,
                              std::vector<Candidate>& heap) const {
  const Node& n = nodes_[id];
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const Candidate c{sq_dist(points_[i], q), order_[i]};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        replace_top(heap, c);
      }
    }
    return;
  }
  const double dl = box_d2(nodes_[n.left], q);
  const double dr = box_d2(nodes_[n.right], q);
  const std::int32_t first = dl <= dr ? n.left : n.right;
  const std::int32_t second = dl <= dr ? n.right : n.left;
  const double d_first = std::min(dl, dr), d_second = std::max(dl, dr);
  // A subtree can only contribute if its box bound does not exceed the
  // current worst candidate; equality must be explored for index ties.
  if (heap.size() < k || d_first <= heap.front().d2) search_knn(first, q, k, heap);
  if (heap.size() < k || d_second <= heap.front().d2) search_knn(second, q, k, heap);
}

void SpatialIndex::knn_into(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const {
  if (k == 0) fail_usage("knn requires k >= 1");
  if (k > points_.size())
    fail_usage("knn: k=" + std::to_string(k) + " exceeds the " + std::to_string(points_.size()) +
               " indexed points");
  thread_local std::vector<Candidate> heap;
  heap.clear();
  heap.reserve(k);
  search_knn(0, q, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  out.resize(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i) out[i] = {heap[i].index, std::sqrt(heap[i].d2)};
}

std::vector<Neighbor> SpatialIndex::knn(const Vec3& q, std::size_t k) const {
  std::vector<Neighbor> out;
  knn_into(q, k, out);
  return out;
}

void SpatialIndex::search_radius(std::int32_t id, const Vec3& q, double r2,
                                 std::vector<Candidate>& out) const {
  const Node& n = nodes_[id];
  if (box_d2(n, q) > r2) return;
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const double d2 = sq_dist(points_[i], q);
      if (d2 <= r2) out.push_back({d2, order_[i]});
    }
    return;
  }
  search_radius(n.left, q, r2, out);
  search_radius(n.right, q, r2, out);
}

std::vector<Neighbor> SpatialIndex::radius(const Vec3& q, double r) const {
  if (!(r >= 0.0)) fail_usage("radius query needs r >= 0");
  std::vector<Candidate> found;
  search_radius(0, q, r * r, found);
  std::sort(found.begin(), found.end());
  std::vector<Neighbor> out(found.size());
  for (std::size_t i = 0; i < found.size(); ++i) out[i] = {found[i].index, std::sqrt(found[i].d2)};
  return out;
}

SpatialIndex build_spatial_index(std::span<const Vec3> points) { return SpatialIndex(points); }

NeighborTable build_neighbor_table(std::span<const Vec3> points, const SpatialIndex& index, std::size_t k) {
  if (k + 1 > index.size())
    fail_usage("neighbor table: k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
               " points, cloud has " + std::to_string(index.size()));
  NeighborTable table;
  table.k = k;
  table.indices.resize(points.size() * k);
#pragma omp parallel
  {
    std::vector<Neighbor> nb;
    // Tree order keeps consecutive queries spatially close.
    const auto order = index.tree_order();
#pragma omp for schedule(dynamic, 256)
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
      const std::size_t i = order[slot];
      index.knn_into(points[i], k + 1, nb);
      std::uint32_t* row = table.indices.data() + i * k;
      std::size_t w = 0;
      for (std::size_t j = 0; j < nb.size() && w < k; ++j)
        if (nb[j].index != i) row[w++] = nb[j].index;
    }
  }
  return table;
}

}  // namespace pcad
