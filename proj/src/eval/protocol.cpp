#include "pcad/eval/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "pcad/error.hpp"
#include "pcad/eval/metrics.hpp"
#include "pcad/rng.hpp"
#include "pcad/scoring/scoring.hpp"
#include "pcad/support/build.hpp"

namespace pcad {

std::vector<DatasetManifest> make_openset_splits(const DatasetManifest& manifest, const std::set<DefectKind>& seen,
                                                 std::size_t shots, std::size_t folds, std::uint64_t seed) {
  if (shots == 0) fail_usage("shots must be positive");
  if (folds == 0) fail_usage("folds must be positive");
  if (seen.empty()) fail_usage("at least one seen defect kind is required");
  if (seen.count(DefectKind::none)) fail_usage("'none' is not a defect kind");

  // Seen-kind anomalies per (category, kind), in manifest order.
  std::map<std::pair<std::string, DefectKind>, std::vector<std::size_t>> pools;
  std::set<DefectKind> present;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const auto& row = manifest.rows[i];
    if (row.role != Role::anomalous) continue;
    present.insert(row.defect_kind);
    if (row.split == Split::train && !seen.count(row.defect_kind))
      fail_data("manifest row '" + row.sample_id + "' is a training anomaly of unseen kind '" +
                to_string(row.defect_kind) + "'");
    if (seen.count(row.defect_kind)) pools[{row.category, row.defect_kind}].push_back(i);
  }
  for (DefectKind k : seen)
    if (!present.count(k)) fail_data("seen kind '" + to_string(k) + "' does not occur in the manifest");
  for (const auto& cat : manifest.categories())
    for (DefectKind k : seen) {
      const auto it = pools.find({cat, k});
      const std::size_t have = it == pools.end() ? 0 : it->second.size();
      if (have < shots)
        fail_data("category '" + cat + "' has " + std::to_string(have) + " '" + to_string(k) +
                  "' anomalies; " + std::to_string(shots) + " shots requested");
    }

  std::vector<DatasetManifest> out;
  out.reserve(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<bool> drawn(manifest.rows.size(), false);
    for (const auto& [key, idx] : pools) {
      std::vector<std::size_t> shuffled = idx;
      Rng rng(derive_seed(seed, "split:" + key.first + ":" + to_string(key.second), f));
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t s = 0; s < shots; ++s) drawn[shuffled[s]] = true;
    }
    DatasetManifest fold;
    fold.base_dir = manifest.base_dir;
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      ManifestRow row = manifest.rows[i];
      if (row.role == Role::anomalous) {
        if (seen.count(row.defect_kind)) {
          if (!drawn[i]) continue;
          row.split = Split::train;
        } else {
          row.split = Split::test;
        }
      }
      fold.rows.push_back(std::move(row));
    }
    out.push_back(std::move(fold));
  }
  return out;
}

namespace {

RunMetrics evaluate_category(const DatasetManifest& fold, const std::string& category, const RunConfig& cfg,
                             FeatureCache& cache, const EvalOptions& options) {
  const DatasetManifest m = fold.filter_category(category);
  DualSupport ds = build_supports(m, cfg, cache);
  ds.category = category;
  const Scorer scorer(ds, ds.cfg);

  std::vector<double> obj_scores, pt_scores;
  std::vector<std::uint8_t> obj_labels, pt_labels;
  for (const auto& row : m.rows) {
    if (row.split != Split::test) continue;
    ScoredCloud sc;
    try {
      sc = score_features(cache.sample(m, row, cfg), scorer);
    } catch (const Error& e) {
      throw Error(e.kind(), "scoring '" + row.sample_id + "' failed: " + e.what());
    }
    obj_scores.push_back(sc.object_score);
    obj_labels.push_back(row.role == Role::anomalous ? 1 : 0);
    if (row.label_path.empty()) continue;
    const auto& labels = cache.labels(m, row);
    if (labels.size() != sc.point_scores.size())
      fail_data("manifest row '" + row.sample_id + "': " + std::to_string(labels.size()) + " labels for " +
                std::to_string(sc.point_scores.size()) + " points");
    pt_scores.insert(pt_scores.end(), sc.point_scores.begin(), sc.point_scores.end());
    pt_labels.insert(pt_labels.end(), labels.begin(), labels.end());
  }
  if (obj_scores.empty()) fail_data("category '" + category + "' has no test samples");

  RunMetrics rm;
  rm.category = category;
  try {
    rm.values = {auroc(obj_scores, obj_labels), auroc(pt_scores, pt_labels), auprc(obj_scores, obj_labels),
                 auprc(pt_scores, pt_labels)};
  } catch (const Error& e) {
    throw Error(e.kind(), "category '" + category + "': " + e.what());
  }
  if (options.silhouette && !ds.anomalous.vectors.empty()) {
    FeatureSet all = ds.normal.vectors;
    std::vector<int> groups(ds.normal.size(), 0);
    for (std::size_t r = 0; r < ds.anomalous.size(); ++r) all.append(ds.anomalous.vectors.row(r));
    groups.resize(all.rows(), 1);
    rm.silhouette = silhouette(all, groups);
  }
  return rm;
}

Summary summarize_values(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(v.size()));
  return s;
}

}  // namespace

std::vector<RunMetrics> evaluate_folds(const std::vector<DatasetManifest>& folds, const RunConfig& cfg,
                                       FeatureCache& cache, const EvalOptions& options, std::size_t first_run) {
  cfg.validate();
  if (folds.empty()) fail_usage("no folds to evaluate");
  std::vector<RunMetrics> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& cat : folds[f].categories()) {
      RunMetrics rm = evaluate_category(folds[f], cat, cfg, cache, options);
      rm.run = first_run + f;
      out.push_back(std::move(rm));
    }
  }
  return out;
}

EvalReport summarize(const std::vector<RunMetrics>& runs, const RunConfig& cfg) {
  EvalReport rep;
  rep.cfg = cfg;
  rep.runs = runs;
  std::map<std::string, std::vector<const RunMetrics*>> by_cat;
  std::map<std::size_t, std::vector<const RunMetrics*>> by_run;
  for (const auto& r : runs) {
    by_cat[r.category].push_back(&r);
    by_run[r.run].push_back(&r);
  }

  auto fill = [](CategoryResult& cr, const std::vector<Metrics>& vals, const std::vector<double>& sil) {
    cr.runs = vals.size();
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      std::vector<double> col;
      for (const auto& v : vals) col.push_back(v[m]);
      cr.metrics[m] = summarize_values(col);
    }
    if (!sil.empty() && sil.size() == vals.size()) cr.silhouette = summarize_values(sil);
  };

  for (const auto& [cat, rs] : by_cat) {
    CategoryResult cr;
    cr.category = cat;
    std::vector<Metrics> vals;
    std::vector<double> sil;
    for (const auto* r : rs) {
      vals.push_back(r->values);
      if (r->silhouette) sil.push_back(*r->silhouette);
    }
    fill(cr, vals, sil);
    rep.categories.push_back(std::move(cr));
  }

  rep.average.category = "average";
  std::vector<Metrics> vals;
  std::vector<double> sil;
  for (const auto& [run, rs] : by_run) {
    Metrics avg{};
    double s = 0.0;
    bool all_sil = true;
    for (const auto* r : rs) {
      for (std::size_t m = 0; m < kMetricCount; ++m) avg[m] += r->values[m];
      if (r->silhouette)
        s += *r->silhouette;
      else
        all_sil = false;
    }
    for (auto& a : avg) a /= static_cast<double>(rs.size());
    vals.push_back(avg);
    if (all_sil) sil.push_back(s / static_cast<double>(rs.size()));
  }
  fill(rep.average, vals, sil);
  return rep;
}

EvalReport evaluate_run(const std::vector<DatasetManifest>& folds, const RunConfig& cfg, FeatureCache& cache,
                        const EvalOptions& options) {
  return summarize(evaluate_folds(folds, cfg, cache, options), cfg);
}

namespace {

std::vector<RunMetrics> protocol_runs(const DatasetManifest& manifest, const RunConfig& cfg, const ProtocolSpec& spec,
                                      FeatureCache& cache, const EvalOptions& options) {
  if (spec.seeds == 0) fail_usage("seeds must be positive");
  std::vector<RunMetrics> all;
  for (std::size_t s = 0; s < spec.seeds; ++s) {
    RunConfig c = cfg;
    c.seed = cfg.seed + s;
    const auto folds = make_openset_splits(manifest, spec.seen, spec.shots, spec.folds, derive_seed(c.seed, "splits"));
    auto runs = evaluate_folds(folds, c, cache, options, s * spec.folds);
    all.insert(all.end(), runs.begin(), runs.end());
  }
  return all;
}

}  // namespace

EvalReport evaluate_protocol(const DatasetManifest& manifest, const RunConfig& cfg, const ProtocolSpec& spec,
                             FeatureCache& cache, const EvalOptions& options) {
  return summarize(protocol_runs(manifest, cfg, spec, cache, options), cfg);
}

AblationReport ablate(const DatasetManifest& manifest, const RunConfig& cfg, const ProtocolSpec& spec,
                      FeatureCache& cache) {
  AblationReport out;
  out.cfg = cfg;
  std::map<std::pair<Stage, Strategy>, EvalReport> done;
  auto run = [&](const std::string& name, Stage stage, Strategy strategy) {
    RunConfig c = cfg;
    c.stage = stage;
    c.strategy = strategy;
    auto it = done.find({stage, strategy});
    if (it == done.end()) it = done.emplace(std::make_pair(stage, strategy), evaluate_protocol(manifest, c, spec, cache)).first;
    return AblationRow{name, stage, strategy, it->second};
  };
  const std::array<Strategy, 5> strategies{Strategy::correspondence, Strategy::identity, Strategy::random,
                                           Strategy::greedy, Strategy::greedy_projected};
  for (std::size_t i = 0; i < strategies.size(); ++i)
    out.strategies.push_back(run("M" + std::to_string(i + 1), Stage::M9, strategies[i]));
  const std::array<Stage, 4> stages{Stage::M6, Stage::M7, Stage::M8, Stage::M9};
  for (std::size_t i = 0; i < stages.size(); ++i)
    out.stages.push_back(run("M" + std::to_string(i + 6), stages[i], cfg.strategy));
  return out;
}

}  // namespace pcad
