#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pcad {

enum class Strategy { identity, random, greedy, greedy_projected, correspondence };

/// Ablation stages: M6 normal bank only, M7 + seen anomalies, M8 + simulated
/// anomalies, M9 + correspondence subsampling.
enum class Stage { M6, M7, M8, M9 };

enum class FeatureNorm { none, block_l2 };
enum class Propagation { nearest, idw3 };

std::string to_string(Strategy s);
std::string to_string(Stage s);
std::string to_string(FeatureNorm n);
std::string to_string(Propagation p);
Strategy parse_strategy(const std::string& text);
Stage parse_stage(const std::string& text);

/// Full pipeline configuration: N=1000, K=3, gamma=0.3, scales 40/80/120 and
/// 128 aggregation points by default.
struct RunConfig {
  std::size_t N = 1000;
  std::size_t K = 3;
  double gamma = 0.3;
  std::vector<std::size_t> scales{40, 80, 120};
  std::size_t aggregation_m = 128;
  std::size_t centers_G = 1024;
  std::size_t normal_k = 20;
  Strategy strategy = Strategy::correspondence;
  Stage stage = Stage::M9;
  bool use_simulated = true;
  std::uint64_t seed = 7;

  std::size_t proj_dim = 16;
  FeatureNorm feature_norm = FeatureNorm::block_l2;
  Propagation propagation = Propagation::nearest;
  bool clamp_alpha = true;
  bool label_masked = false;
  std::size_t sims_per_normal = 1;
  std::vector<std::string> sim_kinds{"convex", "concave"};
  double sim_magnitude = 3.0;
  double sim_ratio_min = 0.006;
  double sim_ratio_max = 0.026;

  std::vector<std::string> seen_kinds{"convex", "concave"};
  std::size_t shots = 5;
  std::size_t folds = 5;

  std::size_t feature_dim() const { return 33 * scales.size(); }

  /// Throws Error(usage) when an invariant is broken.
  void validate() const;

  /// Applies one "key=value" assignment. Unknown keys are usage errors.
  void set(const std::string& key, const std::string& value);

  /// Ordered key/value snapshot; the inverse of set().
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  std::string to_text() const;
};

/// Reads a flat "key=value" file ('#' comments, blank lines ignored).
RunConfig load_config(const std::string& path, RunConfig base = {});
void apply_pairs(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& pairs);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace pcad
