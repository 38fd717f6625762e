#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "pcad/config.hpp"
#include "pcad/eval/manifest.hpp"
#include "pcad/features/feature_matrix.hpp"
#include "pcad/geom/cloud.hpp"
#include "pcad/support/support.hpp"

namespace pcad {

class FeatureCache;

/// K-neighborhood of support row q inside the support: q itself first,
/// then its K-1 nearest other rows by (distance, index).
std::vector<std::uint32_t> support_neighborhood(const FeatureSet& support, std::size_t q, std::size_t K);

/// D(f, q, F) = (1 - exp|f-q| / sum_{m in N_K(q)} exp|f-m|) * |f-q|, with the
/// exponentials shifted by their maximum. K is clamped to |F| with a warning.
double reweighted_distance(std::span<const float> f, std::size_t q, const FeatureSet& support, std::size_t K);
double reweighted_distance(std::span<const float> f, std::size_t q, const FeatureSet& support,
                           std::span<const std::uint32_t> neighborhood);

struct LocalScore {
  double alpha = 0.0;
  double s_n = 0.0;
  double s_a = 0.0;
};

/// alpha = max(0, 1 - gamma * s_A) * s_N (no clamp when `clamp` is false).
/// An empty anomalous support or gamma = 0 returns s_N unchanged.
LocalScore local_score(std::span<const float> f, const DualSupport& ds, double gamma, std::size_t K,
                       bool clamp = true);

/// Scores many feature rows against one bank. Safe to share across threads.
class Scorer {
 public:
  Scorer(const DualSupport& ds, std::size_t K, double gamma, bool clamp = true);
  Scorer(const DualSupport& ds, const RunConfig& cfg);

  std::vector<LocalScore> score_rows(const FeatureMatrix& features) const;
  const DualSupport& bank() const { return ds_; }

 private:
  // Support neighborhoods depend only on the bank; filled on first use.
  struct NeighborhoodCache {
    std::mutex mutex;
    std::vector<std::vector<std::uint32_t>> rows;
  };
  const std::vector<std::vector<std::uint32_t>>& neighborhoods(NeighborhoodCache& cache, const FeatureSet& set,
                                                               const std::vector<std::uint32_t>& qs,
                                                               std::size_t K) const;

  const DualSupport& ds_;
  mutable NeighborhoodCache normal_cache_, anomalous_cache_;
  std::size_t k_normal_, k_anomalous_;
  double gamma_;
  bool clamp_;
};

struct ScoredCloud {
  std::string sample_id;
  std::vector<double> center_scores;
  std::vector<double> point_scores;
  double object_score = 0.0;
  std::vector<double> s_n_components;
  std::vector<double> s_a_components;
};

/// Center scores propagated onto points through the sample's point links.
ScoredCloud score_features(const SampleFeatures& features, const Scorer& scorer);

/// Throws Error(data) naming both dimensions when the bank does not match cfg.
void check_bank_dimension(const DualSupport& ds, const RunConfig& cfg);

ScoredCloud score_sample(const LabeledCloud& cloud, const DualSupport& ds, const RunConfig& cfg);

/// Scores the test rows (of the bank's category), writes <out_dir>/<id>.scores
/// and <out_dir>/object_scores.tsv ("id<TAB>score<TAB>label", %.9g).
std::vector<ScoredCloud> score_dataset(const DatasetManifest& manifest, const DualSupport& ds, const RunConfig& cfg,
                                       const std::string& out_dir, FeatureCache* cache = nullptr);

}  // namespace pcad
