#pragma once

#include <map>
#include <memory>
#include <string>

#include "pcad/config.hpp"
#include "pcad/eval/manifest.hpp"
#include "pcad/features/feature_matrix.hpp"
#include "pcad/support/support.hpp"

namespace pcad {

/// Memoizes per-sample feature extraction (and simulated anomalies) so that
/// folds, strategies and stages sharing a configuration reuse the work.
/// Not thread-safe; the kernels underneath parallelize internally.
class FeatureCache {
 public:
  const SampleFeatures& sample(const DatasetManifest& manifest, const ManifestRow& row, const RunConfig& cfg);
  const SampleFeatures& simulated(const DatasetManifest& manifest, const ManifestRow& normal_row,
                                  std::size_t variant, const RunConfig& cfg);
  /// Point labels of a labeled row (loaded once).
  const std::vector<std::uint8_t>& labels(const DatasetManifest& manifest, const ManifestRow& row);

  std::size_t size() const { return entries_.size(); }
  void clear() {
    entries_.clear();
    labels_.clear();
  }

 private:
  std::map<std::string, std::unique_ptr<SampleFeatures>> entries_;
  std::map<std::string, std::vector<std::uint8_t>> labels_;
};

/// Loads a manifest row's cloud (labels included when present).
LabeledCloud load_row_cloud(const DatasetManifest& manifest, const ManifestRow& row);

/// T(x): one simulated anomaly of a normal cloud, seeded by (cfg.seed, sample id, variant).
LabeledCloud simulate_anomaly(const LabeledCloud& normal_cloud, const RunConfig& cfg, std::size_t variant);

/// Feature pools of the training rows of a single-category manifest.
struct TrainingPools {
  FeatureSet normal;
  std::vector<Provenance> normal_prov;
  FeatureSet anomalous;
  std::vector<Provenance> anomalous_prov;
  std::size_t seen_samples = 0;
  std::size_t simulated_samples = 0;
};

TrainingPools collect_pools(const DatasetManifest& manifest, const RunConfig& cfg, FeatureCache& cache);

/// Stage/strategy-dependent bank construction over one category's training rows.
DualSupport build_supports(const DatasetManifest& manifest, const RunConfig& cfg, FeatureCache& cache);
DualSupport build_supports(const DatasetManifest& manifest, const RunConfig& cfg);
DualSupport build_supports_from_pools(const TrainingPools& pools, const RunConfig& cfg);

}  // namespace pcad
