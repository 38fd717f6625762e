#include "pcad/support/build.hpp"

#include <random>

#include "pcad/error.hpp"
#include "pcad/geom/io.hpp"
#include "pcad/geom/normals.hpp"
#include "pcad/rng.hpp"
#include "pcad/support/coreset.hpp"
#include "pcad/synth/synth.hpp"

namespace pcad {

namespace {

// Config keys that change extracted features.
std::string feature_key(const RunConfig& cfg) {
  std::string k;
  for (auto s : cfg.scales) k += std::to_string(s) + ",";
  k += "|m" + std::to_string(cfg.aggregation_m) + "|G" + std::to_string(cfg.centers_G) + "|nk" +
       std::to_string(cfg.normal_k) + "|s" + std::to_string(cfg.seed) + "|" + to_string(cfg.feature_norm) + "|" +
       to_string(cfg.propagation);
  return k;
}

std::string sim_key(const RunConfig& cfg) {
  std::string k = "|mag" + std::to_string(cfg.sim_magnitude) + "|r" + std::to_string(cfg.sim_ratio_min) + "-" +
                  std::to_string(cfg.sim_ratio_max) + "|";
  for (const auto& s : cfg.sim_kinds) k += s + ",";
  return k;
}

}  // namespace

LabeledCloud load_row_cloud(const DatasetManifest& manifest, const ManifestRow& row) {
  try {
    LabeledCloud cloud = load_cloud(manifest.resolve(row.cloud_path));
    cloud.sample_id = row.sample_id;
    if (!row.label_path.empty()) {
      cloud.labels = load_labels(manifest.resolve(row.label_path));
      cloud.validate();
    }
    return cloud;
  } catch (const Error& e) {
    throw Error(e.kind(), "manifest row '" + row.sample_id + "': " + e.what());
  }
}

LabeledCloud simulate_anomaly(const LabeledCloud& normal_cloud, const RunConfig& cfg, std::size_t variant) {
  const LabeledCloud with_normals = estimate_normals(normal_cloud, cfg.normal_k);
  Rng rng(derive_seed(cfg.seed, "sim:" + normal_cloud.sample_id, variant));
  std::uniform_int_distribution<std::size_t> kind_pick(0, cfg.sim_kinds.size() - 1);
  std::uniform_real_distribution<double> ratio(cfg.sim_ratio_min, cfg.sim_ratio_max);
  DefectSpec spec;
  spec.kind = parse_defect_kind(cfg.sim_kinds[kind_pick(rng)]);
  spec.target_ratio = ratio(rng);
  spec.magnitude = cfg.sim_magnitude;
  spec.seed = rng();
  LabeledCloud out = synthesize_anomaly(with_normals, spec);
  out.sample_id = normal_cloud.sample_id + "#sim" + std::to_string(variant);
  return out;
}

const SampleFeatures& FeatureCache::sample(const DatasetManifest& manifest, const ManifestRow& row,
                                           const RunConfig& cfg) {
  const std::string key = row.sample_id + "|" + feature_key(cfg);
  auto it = entries_.find(key);
  if (it != entries_.end()) return *it->second;
  const LabeledCloud cloud = load_row_cloud(manifest, row);
  SampleFeatures sf;
  try {
    sf = extract_sample_features(cloud, cfg);
  } catch (const Error& e) {
    throw Error(e.kind(), "sample '" + row.sample_id + "': " + e.what());
  }
  return *entries_.emplace(key, std::make_unique<SampleFeatures>(std::move(sf))).first->second;
}

const SampleFeatures& FeatureCache::simulated(const DatasetManifest& manifest, const ManifestRow& row,
                                              std::size_t variant, const RunConfig& cfg) {
  const std::string key = row.sample_id + "#sim" + std::to_string(variant) + "|" + feature_key(cfg) + sim_key(cfg);
  auto it = entries_.find(key);
  if (it != entries_.end()) return *it->second;
  SampleFeatures sf;
  try {
    const LabeledCloud sim = simulate_anomaly(load_row_cloud(manifest, row), cfg, variant);
    sf = extract_sample_features(sim, cfg);
  } catch (const Error& e) {
    throw Error(e.kind(), "simulated anomaly of '" + row.sample_id + "': " + e.what());
  }
  return *entries_.emplace(key, std::make_unique<SampleFeatures>(std::move(sf))).first->second;
}

const std::vector<std::uint8_t>& FeatureCache::labels(const DatasetManifest& manifest, const ManifestRow& row) {
  const std::string key = manifest.resolve(row.label_path);
  auto it = labels_.find(key);
  if (it != labels_.end()) return it->second;
  if (row.label_path.empty()) fail_data("manifest row '" + row.sample_id + "' has no label file");
  try {
    return labels_.emplace(key, load_labels(key)).first->second;
  } catch (const Error& e) {
    throw Error(e.kind(), "manifest row '" + row.sample_id + "': " + e.what());
  }
}

namespace {

void add_rows(const SampleFeatures& sf, const std::string& id, bool masked, FeatureSet& pool,
              std::vector<Provenance>& prov) {
  if (pool.dim == 0) pool.dim = sf.matrix.dim;
  if (sf.matrix.dim != pool.dim)
    fail_data("feature dimension mismatch: sample '" + id + "' has C1=" + std::to_string(sf.matrix.dim) +
              ", expected " + std::to_string(pool.dim));
  for (std::size_t r = 0; r < sf.matrix.rows(); ++r) {
    if (masked && !sf.center_touches_anomaly.empty() && !sf.center_touches_anomaly[r]) continue;
    pool.append(sf.matrix.row(r));
    prov.push_back({id, sf.matrix.center_indices[r]});
  }
}

}  // namespace

TrainingPools collect_pools(const DatasetManifest& manifest, const RunConfig& cfg, FeatureCache& cache) {
  cfg.validate();
  const auto cats = manifest.categories();
  if (cats.size() > 1)
    fail_usage("bank construction works on one category at a time; manifest has " + std::to_string(cats.size()));
  TrainingPools pools;
  pools.normal.dim = pools.anomalous.dim = cfg.feature_dim();
  std::vector<const ManifestRow*> normals;
  for (const auto& row : manifest.rows) {
    if (row.split != Split::train) continue;
    if (row.role == Role::normal) {
      normals.push_back(&row);
      add_rows(cache.sample(manifest, row, cfg), row.sample_id, false, pools.normal, pools.normal_prov);
    }
  }
  if (normals.empty()) fail_data("manifest has no normal training samples");

  const bool want_seen = cfg.stage != Stage::M6;
  const bool want_sim = (cfg.stage == Stage::M8 || cfg.stage == Stage::M9) && cfg.use_simulated;
  if (want_seen) {
    for (const auto& row : manifest.rows) {
      if (row.split != Split::train || row.role != Role::anomalous) continue;
      add_rows(cache.sample(manifest, row, cfg), row.sample_id, cfg.label_masked, pools.anomalous,
               pools.anomalous_prov);
      ++pools.seen_samples;
    }
  }
  if (want_sim) {
    for (const ManifestRow* row : normals)
      for (std::size_t v = 0; v < cfg.sims_per_normal; ++v) {
        add_rows(cache.simulated(manifest, *row, v, cfg), row->sample_id + "#sim" + std::to_string(v),
                 cfg.label_masked, pools.anomalous, pools.anomalous_prov);
        ++pools.simulated_samples;
      }
  }
  return pools;
}

DualSupport build_supports_from_pools(const TrainingPools& pools, const RunConfig& cfg) {
  cfg.validate();
  if (pools.normal.rows() == 0) fail_data("normal feature pool is empty");
  if (pools.normal.dim != cfg.feature_dim())
    fail_data("feature dimension C1=" + std::to_string(pools.normal.dim) + " does not match the configuration (C1=" +
              std::to_string(cfg.feature_dim()) + ")");

  DualSupport ds;
  const std::uint64_t seed_n = derive_seed(cfg.seed, "support:normal");
  const std::uint64_t seed_a = derive_seed(cfg.seed, "support:anomalous");
  const Strategy side = cfg.strategy == Strategy::correspondence ? Strategy::greedy : cfg.strategy;
  const bool cds = cfg.stage == Stage::M9 && cfg.strategy == Strategy::correspondence;

  auto need_normal = [&] {
    if (side != Strategy::identity && pools.normal.rows() < cfg.N)
      fail_data("normal pool has " + std::to_string(pools.normal.rows()) + " features; N=" + std::to_string(cfg.N) +
                " requires at least that many (add normal training samples or lower N)");
  };

  if (cfg.stage != Stage::M6 && pools.anomalous.rows() == 0)
    fail_data("stage " + to_string(cfg.stage) + " needs anomalous training features, but the pool is empty");

  if (cds) {
    ds = correspondence_subsample(pools.normal, pools.normal_prov, pools.anomalous, pools.anomalous_prov, cfg.N,
                                  cfg.seed);
  } else {
    need_normal();
    ds.normal = subsample(pools.normal, pools.normal_prov, cfg.N, side, seed_n, cfg.proj_dim);
    if (cfg.stage != Stage::M6) {
      std::size_t k = cfg.N;
      if (side != Strategy::identity && pools.anomalous.rows() < k) {
        warn("anomalous pool has " + std::to_string(pools.anomalous.rows()) + " features, fewer than N=" +
             std::to_string(k) + "; keeping all of them");
        k = pools.anomalous.rows();
      }
      ds.anomalous = subsample(pools.anomalous, pools.anomalous_prov, k, side, seed_a, cfg.proj_dim);
    } else {
      ds.anomalous.vectors.dim = pools.normal.dim;
      ds.anomalous.strategy = side;
    }
  }
  ds.cfg = cfg;
  if (cfg.stage == Stage::M6) ds.cfg.gamma = 0.0;
  return ds;
}

DualSupport build_supports(const DatasetManifest& manifest, const RunConfig& cfg, FeatureCache& cache) {
  const auto pools = collect_pools(manifest, cfg, cache);
  auto ds = build_supports_from_pools(pools, cfg);
  const auto cats = manifest.categories();
  if (!cats.empty()) ds.category = cats.front();
  return ds;
}

DualSupport build_supports(const DatasetManifest& manifest, const RunConfig& cfg) {
  FeatureCache cache;
  return build_supports(manifest, cfg, cache);
}

}  // namespace pcad
