#include "pcad/features/fpfh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcad/error.hpp"

namespace pcad {

std::optional<PairAngles> pair_angles(const Vec3& ps, const Vec3& ns, const Vec3& pt, const Vec3& nt) {
  const Vec3 d = pt - ps;
  const double dist = d.norm();
  if (!(dist > 0.0)) return std::nullopt;
  const Vec3 dhat = d / dist;
  const Vec3& u = ns;
  Vec3 v = dhat.cross(u);
  const double vlen = v.norm();
  if (!(vlen > 1e-12)) return std::nullopt;
  v /= vlen;
  const Vec3 w = u.cross(v);
  return PairAngles{v.dot(nt), u.dot(dhat), std::atan2(w.dot(nt), u.dot(nt))};
}

std::size_t angle_bin(double value, double lo, double hi) {
  if (!(value > lo)) return 0;
  if (value >= hi) return kAngleBins - 1;
  const auto b = static_cast<std::size_t>(std::floor((value - lo) / (hi - lo) * static_cast<double>(kAngleBins)));
  return std::min(b, kAngleBins - 1);
}

Spfh spfh_from_neighbors(std::span<const Vec3> points, std::span<const Vec3> normals, std::size_t s,
                         std::span<const std::uint32_t> neighbors) {
  constexpr double pi = std::numbers::pi;
  std::array<std::uint32_t, kFpfhDim> counts{};
  std::uint32_t valid = 0;
  for (std::uint32_t t : neighbors) {
    const auto a = pair_angles(points[s], normals[s], points[t], normals[t]);
    if (!a) continue;
    ++valid;
    ++counts[angle_bin(a->alpha, -1.0, 1.0)];
    ++counts[kAngleBins + angle_bin(a->phi, -1.0, 1.0)];
    ++counts[2 * kAngleBins + angle_bin(a->theta, -pi, pi)];
  }
  Spfh out;
  if (valid == 0) {
    out.degenerate = true;
    return out;
  }
  const double scale = 100.0 / static_cast<double>(valid);
  for (std::size_t b = 0; b < kFpfhDim; ++b) out.bins[b] = counts[b] * scale;
  return out;
}

namespace {

void require_normals(std::span<const Vec3> points, std::span<const Vec3> normals) {
  if (normals.size() != points.size()) fail_data("FPFH needs a normal for every point");
}

void require_scale(std::size_t k, std::size_t n) {
  if (k == 0) fail_usage("FPFH neighbor count must be >= 1");
  if (k + 1 > n)
    fail_usage("FPFH scale k=" + std::to_string(k) + " exceeds the point count (" + std::to_string(n) +
               " points allow k <= " + std::to_string(n - 1) + ")");
}

}  // namespace

Spfh compute_spfh(const LabeledCloud& cloud, std::size_t point, std::size_t k) {
  require_normals(cloud.points, cloud.normals);
  require_scale(k, cloud.size());
  if (point >= cloud.size()) fail_usage("compute_spfh: point index out of range");
  SpatialIndex index(cloud.points);
  auto nb = index.knn(cloud.points[point], k + 1);
  std::vector<std::uint32_t> ids;
  for (const auto& n : nb)
    if (n.index != point && ids.size() < k) ids.push_back(n.index);
  return spfh_from_neighbors(cloud.points, cloud.normals, point, ids);
}

FpfhResult compute_multiscale_fpfh(std::span<const Vec3> points, std::span<const Vec3> normals,
                                   const SpatialIndex& index, std::span<const std::size_t> scales) {
  require_normals(points, normals);
  if (scales.empty()) fail_usage("multi-scale FPFH needs at least one scale");
  const std::size_t n = points.size();
  std::size_t kmax = 0;
  for (auto k : scales) {
    require_scale(k, n);
    kmax = std::max(kmax, k);
  }
  // One table at the largest scale; smaller scales use its row prefixes,
  // which are exactly their own k-nearest lists under the tie rule.
  // The work runs in the index's tree order: neighbor rows then touch nearby
  // memory, which matters once the SPFH table outgrows the cache.
  const auto order = index.tree_order();
  if (order.size() != n) fail_usage("spatial index does not match the point set");
  std::vector<std::uint32_t> slot_of(n);
  for (std::size_t s = 0; s < n; ++s) slot_of[order[s]] = static_cast<std::uint32_t>(s);
  std::vector<Vec3> pts(n), nrm(n);
  for (std::size_t s = 0; s < n; ++s) {
    pts[s] = points[order[s]];
    nrm[s] = normals[order[s]];
  }
  std::vector<std::uint32_t> nbr(n * kmax);
  {
    const NeighborTable table = build_neighbor_table(points, index, kmax);
    for (std::size_t s = 0; s < n; ++s) {
      const auto row = table.row(order[s]);
      for (std::size_t j = 0; j < kmax; ++j) nbr[s * kmax + j] = slot_of[row[j]];
    }
  }

  FpfhResult result;
  const std::size_t ns = scales.size();
  const std::size_t dim = kFpfhDim * ns;
  result.features.dim = dim;
  result.features.values.assign(n * dim, 0.0);
  std::size_t degenerate = 0;

  // Scales by neighbor count; each point's pair angles are computed once over
  // the longest list and the counts are snapshotted at every prefix.
  std::vector<std::size_t> by_k(ns);
  for (std::size_t s = 0; s < ns; ++s) by_k[s] = s;
  std::stable_sort(by_k.begin(), by_k.end(), [&](std::size_t a, std::size_t b) { return scales[a] < scales[b]; });

  constexpr double pi = std::numbers::pi;
  std::vector<double> spfh(n * dim);  // per slot: [scale][bin]
#pragma omp parallel for schedule(dynamic, 128) reduction(+ : degenerate)
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint32_t, kFpfhDim> counts{};
    std::uint32_t valid = 0;
    std::size_t done = 0;
    const std::uint32_t* row = nbr.data() + i * kmax;
    for (std::size_t s : by_k) {
      for (; done < scales[s]; ++done) {
        const auto a = pair_angles(pts[i], nrm[i], pts[row[done]], nrm[row[done]]);
        if (!a) continue;
        ++valid;
        ++counts[angle_bin(a->alpha, -1.0, 1.0)];
        ++counts[kAngleBins + angle_bin(a->phi, -1.0, 1.0)];
        ++counts[2 * kAngleBins + angle_bin(a->theta, -pi, pi)];
      }
      if (valid == 0) {
        ++degenerate;
        continue;  // stays zero
      }
      double* dst = spfh.data() + i * dim + s * kFpfhDim;
      const double scale = 100.0 / static_cast<double>(valid);
      for (std::size_t b = 0; b < kFpfhDim; ++b) dst[b] = counts[b] * scale;
    }
  }

#pragma omp parallel
  {
    std::vector<double> wts(kmax);
#pragma omp for schedule(dynamic, 128)
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t* row = nbr.data() + i * kmax;
      for (std::size_t j = 0; j < kmax; ++j) {
        const double w = (pts[row[j]] - pts[i]).norm();
        wts[j] = w > 0.0 ? 1.0 / w : 0.0;
      }
      double* out = result.features.values.data() + static_cast<std::size_t>(order[i]) * dim;
      for (std::size_t s = 0; s < ns; ++s) {
        const std::size_t k = scales[s];
        double acc[kFpfhDim] = {};
        for (std::size_t j = 0; j < k; ++j) {
          if (wts[j] == 0.0) continue;
          const double f = wts[j];
          const double* src = spfh.data() + static_cast<std::size_t>(row[j]) * dim + s * kFpfhDim;
          for (std::size_t b = 0; b < kFpfhDim; ++b) acc[b] += src[b] * f;
        }
        const double inv_k = 1.0 / static_cast<double>(k);
        const double* self = spfh.data() + i * dim + s * kFpfhDim;
        for (std::size_t b = 0; b < kFpfhDim; ++b) out[s * kFpfhDim + b] = self[b] + inv_k * acc[b];
      }
    }
  }
  result.degenerate = degenerate;
  return result;
}

FpfhResult compute_multiscale_fpfh(const LabeledCloud& cloud, std::span<const std::size_t> scales) {
  if (!cloud.has_normals()) fail_data("FPFH needs a cloud with normals");
  cloud.validate();
  SpatialIndex index(cloud.points);
  return compute_multiscale_fpfh(cloud.points, cloud.normals, index, scales);
}

FpfhResult compute_fpfh(const LabeledCloud& cloud, std::size_t k) {
  const std::size_t scales[] = {k};
  return compute_multiscale_fpfh(cloud, scales);
}

}  // namespace pcad
