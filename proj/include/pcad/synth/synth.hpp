#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcad/eval/manifest.hpp"
#include "pcad/geom/cloud.hpp"
#include "pcad/synth/defect_kind.hpp"

namespace pcad {

/// One local surface defect. `magnitude` is the peak displacement in units of
/// the cloud's median nearest-neighbor spacing.
struct DefectSpec {
  DefectKind kind = DefectKind::convex;
  double target_ratio = 0.012;  // fraction of points to label, in (0, 0.05]
  double magnitude = 4.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Minimum labeled region size accepted by synthesize_anomaly().
inline constexpr std::size_t kMinDefectPoints = 8;

/// Displaces the round(target_ratio * N) points nearest to a seeded seed point
/// with a Gaussian falloff (sigma = half the region radius) and labels exactly
/// those points. Needs normals.
LabeledCloud synthesize_anomaly(const LabeledCloud& cloud, const DefectSpec& spec);

enum class Primitive { plane, sphere, cylinder, torus, washer };

std::string to_string(Primitive p);
Primitive parse_primitive(const std::string& text);

/// Fixed primitive dimensions (unit scale).
namespace shape_dims {
inline constexpr double kPlaneHalf = 1.0;        // square [-1,1]^2 at z=0
inline constexpr double kSphereRadius = 1.0;
inline constexpr double kCylinderRadius = 0.5;   // closed, z in [-1,1]
inline constexpr double kCylinderHalfHeight = 1.0;
inline constexpr double kTorusMajor = 1.0;
inline constexpr double kTorusMinor = 0.35;
inline constexpr double kWasherInner = 0.45;
inline constexpr double kWasherOuter = 1.0;
inline constexpr double kWasherHalfThickness = 0.12;
}  // namespace shape_dims

struct ShapeSpec {
  Primitive primitive = Primitive::sphere;
  std::size_t n_points = 4000;
  double noise_sigma = 0.0;  // multiples of median spacing, along the normal
  std::uint64_t seed = 0;

  void validate() const;
};

/// Quasi-uniform surface sample with analytic outward normals, all labels 0.
LabeledCloud gen_shape(const ShapeSpec& spec);

struct BenchmarkCategory {
  std::string name;
  ShapeSpec shape;  // seed is replaced per sample
};

struct BenchmarkSpec {
  std::vector<BenchmarkCategory> categories;
  std::size_t normals = 20;        // per category
  std::size_t train_normals = 10;  // of which go to the train split
  std::size_t anomalies = 10;      // per category, spread evenly over `kinds`
  std::vector<DefectKind> kinds{kAllDefectKinds.begin(), kAllDefectKinds.end()};
  double ratio_min = 0.006;
  double ratio_max = 0.026;
  double magnitude = 4.0;
  std::uint64_t seed = 7;
};

/// The default categories: name i cycles sphere, cylinder, torus, washer, plane.
std::vector<BenchmarkCategory> default_categories(std::size_t count, std::size_t n_points, double noise_sigma);

/// Writes out_dir/<category>/<split>/<normal|kind>/<id>.xyz (+ .labels for
/// anomalous and test samples) and out_dir/manifest.tsv. Anomalous samples
/// are written to the test split; make_openset_splits() later draws the seen
/// shots from them.
DatasetManifest gen_benchmark(const BenchmarkSpec& spec, const std::string& out_dir);

struct BenchmarkStats {
  std::size_t samples = 0;
  std::size_t anomalous = 0;
  double min_ratio = 0.0, max_ratio = 0.0, mean_ratio = 0.0;
};
BenchmarkStats benchmark_stats(const DatasetManifest& manifest);

}  // namespace pcad
