#include "pcad/scoring/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pcad/error.hpp"
#include "pcad/geom/io.hpp"
#include "pcad/support/build.hpp"

namespace fs = std::filesystem;

namespace pcad {

std::vector<std::uint32_t> support_neighborhood(const FeatureSet& support, std::size_t q, std::size_t K) {
  const std::size_t n = support.rows();
  if (n == 0) fail_data("reweighted distance over an empty support");
  if (q >= n) fail_usage("support row " + std::to_string(q) + " is not in the support");
  K = std::clamp<std::size_t>(K, 1, n);
  std::vector<std::pair<double, std::uint32_t>> others;
  others.reserve(n - 1);
  const auto qrow = support.row(q);
  for (std::size_t i = 0; i < n; ++i)
    if (i != q) others.emplace_back(sq_distance(support.row(i), qrow), static_cast<std::uint32_t>(i));
  const std::size_t take = K - 1;
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take), others.end());
  std::vector<std::uint32_t> out{static_cast<std::uint32_t>(q)};
  for (std::size_t i = 0; i < take; ++i) out.push_back(others[i].second);
  return out;
}

double reweighted_distance(std::span<const float> f, std::size_t q, const FeatureSet& support,
                           std::span<const std::uint32_t> nbhd) {
  const double dq = std::sqrt(sq_distance(f, support.row(q)));
  if (dq == 0.0) return 0.0;
  double dmax = dq;
  std::vector<double> d(nbhd.size());
  for (std::size_t i = 0; i < nbhd.size(); ++i) {
    d[i] = nbhd[i] == q ? dq : std::sqrt(sq_distance(f, support.row(nbhd[i])));
    dmax = std::max(dmax, d[i]);
  }
  double denom = 0.0;
  for (double di : d) denom += std::exp(di - dmax);
  const double ratio = std::exp(dq - dmax) / denom;
  return std::max(0.0, 1.0 - ratio) * dq;
}

double reweighted_distance(std::span<const float> f, std::size_t q, const FeatureSet& support, std::size_t K) {
  if (support.empty()) fail_data("reweighted distance over an empty support");
  if (q >= support.rows()) fail_usage("q is not a member of the support");
  if (K > support.rows()) {
    warn("K=" + std::to_string(K) + " exceeds the support size " + std::to_string(support.rows()) + "; clamping");
    K = support.rows();
  }
  if (K == 0) fail_usage("K must be >= 1");
  const auto nbhd = support_neighborhood(support, q, K);
  return reweighted_distance(f, q, support, nbhd);
}

namespace {

std::size_t clamp_k(std::size_t K, std::size_t n, const char* which) {
  if (n == 0) return 0;
  if (K > n) {
    warn(std::string("K=") + std::to_string(K) + " exceeds the " + which + " support size " + std::to_string(n) +
         "; clamping");
    return n;
  }
  return K;
}

double combine(double s_n, double s_a, double gamma, bool clamp) {
  double factor = 1.0 - gamma * s_a;
  if (clamp) factor = std::max(0.0, factor);
  return factor * s_n;
}

}  // namespace

LocalScore local_score(std::span<const float> f, const DualSupport& ds, double gamma, std::size_t K, bool clamp) {
  if (ds.normal.vectors.empty()) fail_data("local score needs a non-empty normal support");
  if (K == 0) fail_usage("K must be >= 1");
  LocalScore out;
  const auto g = nearest_row(ds.normal.vectors, f);
  out.s_n = reweighted_distance(f, g.index, ds.normal.vectors,
                                support_neighborhood(ds.normal.vectors, g.index,
                                                     std::min(K, ds.normal.vectors.rows())));
  if (gamma == 0.0 || ds.anomalous.vectors.empty()) {
    out.alpha = out.s_n;
    return out;
  }
  const auto h = nearest_row(ds.anomalous.vectors, f);
  out.s_a = reweighted_distance(f, h.index, ds.anomalous.vectors,
                                support_neighborhood(ds.anomalous.vectors, h.index,
                                                     std::min(K, ds.anomalous.vectors.rows())));
  out.alpha = combine(out.s_n, out.s_a, gamma, clamp);
  return out;
}

Scorer::Scorer(const DualSupport& ds, std::size_t K, double gamma, bool clamp)
    : ds_(ds), gamma_(gamma), clamp_(clamp) {
  if (ds.normal.vectors.empty()) fail_data("bank has an empty normal support");
  if (K == 0) fail_usage("K must be >= 1");
  if (!(gamma >= 0.0)) fail_usage("gamma must be >= 0");
  if (K == 1) warn("K=1 makes the reweighted distance identically zero");
  k_normal_ = clamp_k(K, ds.normal.size(), "normal");
  k_anomalous_ = clamp_k(K, ds.anomalous.size(), "anomalous");
}

// Fills the cached neighborhoods of the rows in `qs` that are still missing.
const std::vector<std::vector<std::uint32_t>>& Scorer::neighborhoods(NeighborhoodCache& cache, const FeatureSet& set,
                                                                     const std::vector<std::uint32_t>& qs,
                                                                     std::size_t K) const {
  std::lock_guard<std::mutex> lock(cache.mutex);
  if (cache.rows.size() != set.rows()) cache.rows.assign(set.rows(), {});
  std::vector<std::uint32_t> missing;
  for (auto q : qs)
    if (cache.rows[q].empty()) missing.push_back(q);
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (missing.empty()) return cache.rows;
  const FeatureSet own = set.select(missing);
  const auto nearest = nearest_k_rows(set, own.values.data(), missing.size(), K - 1, missing.data());
  for (std::size_t i = 0; i < missing.size(); ++i) {
    auto& row = cache.rows[missing[i]];
    row.push_back(missing[i]);
    for (const auto& nb : nearest[i]) row.push_back(nb.index);
  }
  return cache.rows;
}

Scorer::Scorer(const DualSupport& ds, const RunConfig& cfg) : Scorer(ds, cfg.K, cfg.gamma, cfg.clamp_alpha) {}

std::vector<LocalScore> Scorer::score_rows(const FeatureMatrix& fm) const {
  if (fm.dim != ds_.dim())
    fail_data("feature dimension C1=" + std::to_string(fm.dim) + " does not match the bank (C1=" +
              std::to_string(ds_.dim()) + ")");
  const std::size_t g = fm.rows();
  const bool dual = gamma_ != 0.0 && !ds_.anomalous.vectors.empty();
  std::vector<std::uint32_t> gstar(g), hstar(g);
  const auto near_n = nearest_rows(ds_.normal.vectors, fm.values.data(), g);
  for (std::size_t r = 0; r < g; ++r) gstar[r] = near_n[r].index;
  if (dual) {
    const auto near_a = nearest_rows(ds_.anomalous.vectors, fm.values.data(), g);
    for (std::size_t r = 0; r < g; ++r) hstar[r] = near_a[r].index;
  }

  const auto& nb_n = neighborhoods(normal_cache_, ds_.normal.vectors, gstar, k_normal_);
  const auto& nb_a = dual ? neighborhoods(anomalous_cache_, ds_.anomalous.vectors, hstar, k_anomalous_) : nb_n;

  std::vector<LocalScore> out(g);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t r = 0; r < g; ++r) {
    LocalScore& s = out[r];
    s.s_n = reweighted_distance(fm.row(r), gstar[r], ds_.normal.vectors, nb_n[gstar[r]]);
    if (!dual) {
      s.alpha = s.s_n;
      continue;
    }
    s.s_a = reweighted_distance(fm.row(r), hstar[r], ds_.anomalous.vectors, nb_a[hstar[r]]);
    s.alpha = combine(s.s_n, s.s_a, gamma_, clamp_);
  }
  return out;
}

ScoredCloud score_features(const SampleFeatures& sf, const Scorer& scorer) {
  const auto local = scorer.score_rows(sf.matrix);
  ScoredCloud sc;
  sc.sample_id = sf.matrix.sample_id;
  sc.center_scores.resize(local.size());
  sc.s_n_components.resize(local.size());
  sc.s_a_components.resize(local.size());
  for (std::size_t r = 0; r < local.size(); ++r) {
    sc.center_scores[r] = local[r].alpha;
    sc.s_n_components[r] = local[r].s_n;
    sc.s_a_components[r] = local[r].s_a;
  }
  const std::size_t L = sf.links_per_point;
  sc.point_scores.resize(sf.point_count);
  for (std::size_t i = 0; i < sf.point_count; ++i) {
    if (L == 1) {
      sc.point_scores[i] = sc.center_scores[sf.point_links[i]];
      continue;
    }
    double v = 0.0;
    for (std::size_t j = 0; j < L; ++j) v += sf.point_weights[i * L + j] * sc.center_scores[sf.point_links[i * L + j]];
    sc.point_scores[i] = v;
  }
  sc.object_score = sc.point_scores.empty() ? 0.0 : *std::max_element(sc.point_scores.begin(), sc.point_scores.end());
  return sc;
}

void check_bank_dimension(const DualSupport& ds, const RunConfig& cfg) {
  if (ds.dim() != cfg.feature_dim())
    fail_data("bank feature dimension C1=" + std::to_string(ds.dim()) +
              " does not match the configured feature dimension C1=" + std::to_string(cfg.feature_dim()));
}

ScoredCloud score_sample(const LabeledCloud& cloud, const DualSupport& ds, const RunConfig& cfg) {
  check_bank_dimension(ds, cfg);
  const auto sf = extract_sample_features(cloud, cfg);
  Scorer scorer(ds, cfg);
  auto sc = score_features(sf, scorer);
  sc.sample_id = cloud.sample_id;
  return sc;
}

namespace {
std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

std::vector<ScoredCloud> score_dataset(const DatasetManifest& manifest, const DualSupport& ds, const RunConfig& cfg,
                                       const std::string& out_dir, FeatureCache* cache) {
  check_bank_dimension(ds, cfg);
  FeatureCache local;
  FeatureCache& fc = cache ? *cache : local;
  Scorer scorer(ds, cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) fail_data("cannot create output directory '" + out_dir + "'");

  std::vector<ScoredCloud> results;
  std::string table;
  for (const auto& row : manifest.rows) {
    if (row.split != Split::test) continue;
    if (!ds.category.empty() && row.category != ds.category) continue;
    try {
      const auto& sf = fc.sample(manifest, row, cfg);
      ScoredCloud sc = score_features(sf, scorer);
      sc.sample_id = row.sample_id;
      LabeledCloud shape;
      shape.points.resize(sc.point_scores.size());
      save_scores(shape, sc.point_scores, (fs::path(out_dir) / (row.sample_id + ".scores")).string());
      table += row.sample_id + "\t" + fmt9(sc.object_score) + "\t" + (row.role == Role::anomalous ? "1" : "0") + "\n";
      results.push_back(std::move(sc));
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.find(row.sample_id) != std::string::npos) throw;
      throw Error(e.kind(), "scoring '" + row.sample_id + "' failed: " + msg);
    }
  }
  const auto path = (fs::path(out_dir) / "object_scores.tsv").string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open '" + path + "' for writing");
  out << table;
  if (!out) fail_data("write failed: '" + path + "'");
  return results;
}

}  // namespace pcad
