#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcad/geom/cloud.hpp"
#include "pcad/geom/spatial_index.hpp"

namespace pcad {

inline constexpr std::size_t kAngleBins = 11;
inline constexpr std::size_t kFpfhDim = 3 * kAngleBins;

using Histogram33 = std::array<double, kFpfhDim>;

/// Darboux-frame angles of one (source, target) point pair.
struct PairAngles {
  double alpha;  // v . n_t
  double phi;    // u . d
  double theta;  // atan2(w . n_t, u . n_t)
};

/// Returns nullopt when the points coincide or the frame is undefined
/// (displacement parallel to the source normal).
std::optional<PairAngles> pair_angles(const Vec3& ps, const Vec3& ns, const Vec3& pt, const Vec3& nt);

/// Bin of `value` among kAngleBins half-open bins over [lo, hi]; the last
/// bin is closed and out-of-range values are clamped.
std::size_t angle_bin(double value, double lo, double hi);

struct Spfh {
  Histogram33 bins{};     // [alpha | phi | theta], each block sums to 100
  bool degenerate = false;  // no valid pair; bins are all zero
};

Spfh spfh_from_neighbors(std::span<const Vec3> points, std::span<const Vec3> normals, std::size_t source,
                         std::span<const std::uint32_t> neighbors);

/// SPFH of one point from its k nearest neighbors (itself excluded).
Spfh compute_spfh(const LabeledCloud& cloud, std::size_t point, std::size_t k_neighbors);

/// Row-major per-point feature table.
struct PointFeatures {
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

struct FpfhResult {
  PointFeatures features;
  std::size_t degenerate = 0;  // (point, scale) pairs whose SPFH had no valid pair
};

/// FPFH(p) = SPFH(p) + (1/k) sum_t SPFH(p_t) / |p_t - p| over the k nearest
/// neighbors; coincident neighbors are left out of the sum.
FpfhResult compute_fpfh(const LabeledCloud& cloud, std::size_t k_neighbors);

/// Concatenation of FPFH at each neighbor count in `scales` (33 per scale).
FpfhResult compute_multiscale_fpfh(const LabeledCloud& cloud, std::span<const std::size_t> scales);
FpfhResult compute_multiscale_fpfh(std::span<const Vec3> points, std::span<const Vec3> normals,
                                   const SpatialIndex& index, std::span<const std::size_t> scales);

}  // namespace pcad
