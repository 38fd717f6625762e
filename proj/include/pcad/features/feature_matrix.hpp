#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcad/config.hpp"
#include "pcad/features/fpfh.hpp"
#include "pcad/geom/cloud.hpp"

namespace pcad {

/// G center descriptors of dimension C1 = 33 * |scales|, stored as float32.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<float> values;
  std::vector<std::uint32_t> center_indices;
  std::vector<std::size_t> scales;
  std::size_t aggregation_m = 0;
  std::string sample_id;

  std::size_t rows() const { return center_indices.size(); }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void validate() const;
};

/// Row for center c = mean of the per-point features of the m nearest points
/// to c (c included), summed in neighbor order.
FeatureMatrix aggregate_at_centers(const PointFeatures& features, const LabeledCloud& cloud,
                                   std::span<const std::uint32_t> centers, std::size_t m);
FeatureMatrix aggregate_at_centers(const PointFeatures& features, std::span<const Vec3> points,
                                   const SpatialIndex& index, std::span<const std::uint32_t> centers,
                                   std::size_t m);

/// Scales every 33-wide block of every row to unit L2 norm (zero blocks stay zero).
void normalize_blocks(FeatureMatrix& matrix);

/// normals -> multi-scale FPFH -> FPS centers -> aggregation (-> block norm).
FeatureMatrix extract_features(const LabeledCloud& cloud, const RunConfig& cfg);

/// Features plus what scoring needs to map center scores back onto points.
struct SampleFeatures {
  FeatureMatrix matrix;
  std::size_t links_per_point = 1;       // 1 (nearest) or 3 (idw3)
  std::vector<std::uint32_t> point_links;  // n * links_per_point center rows
  std::vector<double> point_weights;       // matching weights, sum to 1
  std::vector<std::uint8_t> center_touches_anomaly;  // empty when unlabeled
  std::size_t point_count = 0;
};

SampleFeatures extract_sample_features(const LabeledCloud& cloud, const RunConfig& cfg);

/// Seed used for the FPS start of a sample under a config.
std::uint64_t fps_seed(const RunConfig& cfg, const std::string& sample_id);

/// "PCADFEAT" dump: version u32, G u64, C1 u32, G*C1 float32, G u64 indices.
void save_feature_matrix(const FeatureMatrix& matrix, const std::string& path);
FeatureMatrix load_feature_matrix(const std::string& path);

}  // namespace pcad
