#include "pcad/geom/sampling.hpp"

#include <limits>
#include <random>

#include <omp.h>

#include "pcad/error.hpp"
#include "pcad/rng.hpp"

namespace pcad {

std::uint32_t fps_first_index(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return static_cast<std::uint32_t>(pick(rng));
}

std::vector<std::uint32_t> farthest_point_sample(std::span<const Vec3> points, std::size_t g,
                                                 std::uint64_t seed) {
  if (points.empty()) fail_data("farthest point sampling on an empty cloud");
  return farthest_point_sample_from(points, g, fps_first_index(points.size(), seed));
}

std::vector<std::uint32_t> farthest_point_sample_from(std::span<const Vec3> points, std::size_t g,
                                                      std::uint32_t first) {
  const std::size_t n = points.size();
  if (g == 0) fail_usage("farthest point sampling needs g >= 1");
  if (g > n)
    fail_usage("farthest point sampling: g=" + std::to_string(g) + " exceeds " + std::to_string(n) +
               " points");
  if (first >= n) fail_usage("farthest point sampling: first index out of range");

  // Selected points carry -1 so they can never win the argmax again.
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> selected;
  selected.reserve(g);
  selected.push_back(first);
  min_d2[first] = -1.0;

  const int threads = omp_get_max_threads();
  std::vector<double> best_val(static_cast<std::size_t>(threads));
  std::vector<std::size_t> best_idx(static_cast<std::size_t>(threads));

  while (selected.size() < g) {
    const Vec3 last = points[selected.back()];
#pragma omp parallel num_threads(threads)
    {
      const auto t = static_cast<std::size_t>(omp_get_thread_num());
      double bv = -2.0;
      std::size_t bi = 0;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        double m = min_d2[i];
        if (m >= 0.0) {
          const double dx = points[i][0] - last[0], dy = points[i][1] - last[1], dz = points[i][2] - last[2];
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 < m) m = min_d2[i] = d2;
        }
        if (m > bv) {  // strict: keeps the lowest index within this chunk
          bv = m;
          bi = i;
        }
      }
      best_val[t] = bv;
      best_idx[t] = bi;
    }
    // Static chunks are ordered by thread id, so a strict comparison in
    // thread order preserves the lowest-index tie rule.
    double bv = -2.0;
    std::size_t bi = 0;
    for (int t = 0; t < threads; ++t)
      if (best_val[t] > bv) {
        bv = best_val[t];
        bi = best_idx[t];
      }
    selected.push_back(static_cast<std::uint32_t>(bi));
    min_d2[bi] = -1.0;
  }
  return selected;
}

}  // namespace pcad
