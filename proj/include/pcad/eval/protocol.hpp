#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcad/config.hpp"
#include "pcad/eval/manifest.hpp"

namespace pcad {

class FeatureCache;

/// Open-set folds. For every fold and category, `shots` anomalous rows of each
/// seen kind are drawn into train; unseen-kind anomalies and test normals form
/// the test split; undrawn seen-kind anomalies are dropped.
std::vector<DatasetManifest> make_openset_splits(const DatasetManifest& manifest, const std::set<DefectKind>& seen,
                                                 std::size_t shots, std::size_t folds, std::uint64_t seed);

inline constexpr std::size_t kMetricCount = 4;
inline constexpr std::array<const char*, kMetricCount> kMetricNames{"o_auroc", "p_auroc", "o_auprc", "p_auprc"};
using Metrics = std::array<double, kMetricCount>;

/// Metrics of one (run, category) pair. P-metrics pool all labeled test
/// points of the category.
struct RunMetrics {
  std::string category;
  std::size_t run = 0;
  Metrics values{};
  std::optional<double> silhouette;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population std over runs
};

struct CategoryResult {
  std::string category;
  std::size_t runs = 0;
  std::array<Summary, kMetricCount> metrics{};
  std::optional<Summary> silhouette;
};

struct EvalReport {
  std::vector<CategoryResult> categories;  // sorted by name
  CategoryResult average;                  // per-run category averages, then mean/std over runs
  RunConfig cfg;
  std::vector<RunMetrics> runs;
};

struct EvalOptions {
  bool silhouette = false;  // normal vs anomalous bank separation per run
};

/// One run per fold manifest: build a bank per category on its train rows,
/// score its test rows, compute metrics.
std::vector<RunMetrics> evaluate_folds(const std::vector<DatasetManifest>& folds, const RunConfig& cfg,
                                       FeatureCache& cache, const EvalOptions& options = {},
                                       std::size_t first_run = 0);

EvalReport summarize(const std::vector<RunMetrics>& runs, const RunConfig& cfg);

EvalReport evaluate_run(const std::vector<DatasetManifest>& folds, const RunConfig& cfg, FeatureCache& cache,
                        const EvalOptions& options = {});

/// Split and run settings shared by eval and ablate.
struct ProtocolSpec {
  std::set<DefectKind> seen;
  std::size_t shots = 5;
  std::size_t folds = 5;
  std::size_t seeds = 1;
};

/// Seed s in [0, seeds) runs with cfg.seed + s and its own fold draw.
EvalReport evaluate_protocol(const DatasetManifest& manifest, const RunConfig& cfg, const ProtocolSpec& spec,
                             FeatureCache& cache, const EvalOptions& options = {});

struct AblationRow {
  std::string name;  // M1..M9
  Stage stage = Stage::M9;
  Strategy strategy = Strategy::correspondence;
  EvalReport report;
};

/// M1..M5 sweep strategies at stage M9; M6..M9 sweep stages with cfg.strategy.
struct AblationReport {
  std::vector<AblationRow> strategies;
  std::vector<AblationRow> stages;
  RunConfig cfg;
};

AblationReport ablate(const DatasetManifest& manifest, const RunConfig& cfg, const ProtocolSpec& spec,
                      FeatureCache& cache);

}  // namespace pcad
