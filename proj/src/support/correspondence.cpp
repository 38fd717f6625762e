#include <algorithm>

#include "pcad/error.hpp"
#include "pcad/rng.hpp"
#include "pcad/support/coreset.hpp"
#include "pcad/support/support.hpp"

namespace pcad {

SupportSet make_support(const FeatureSet& pool, const std::vector<Provenance>& prov,
                        std::span<const std::uint32_t> indices, Strategy strategy, std::uint64_t seed) {
  SupportSet s;
  s.vectors = pool.select(indices);
  if (s.vectors.dim == 0) s.vectors.dim = pool.dim;
  if (!prov.empty()) {
    s.provenance.reserve(indices.size());
    for (auto i : indices) s.provenance.push_back(prov[i]);
  }
  s.strategy = strategy;
  s.seed = seed;
  return s;
}

SupportSet subsample(const FeatureSet& f, const std::vector<Provenance>& prov, std::size_t k, Strategy strategy,
                     std::uint64_t seed, std::size_t proj_dim) {
  const auto idx = select_indices(f, k, strategy, seed, proj_dim);
  return make_support(f, prov, idx, strategy, seed);
}

CorrespondenceSelection correspondence_select(const FeatureSet& fn, const FeatureSet& fa, std::size_t N,
                                              std::uint64_t seed) {
  if (N == 0) fail_usage("correspondence subsampling needs N >= 1");
  if (fn.rows() < N)
    fail_data("correspondence subsampling needs at least N=" + std::to_string(N) + " normal features, got " +
              std::to_string(fn.rows()));
  if (fa.rows() == 0) fail_data("correspondence subsampling needs anomalous features, got none");
  if (fn.dim != fa.dim)
    fail_data("normal/anomalous feature dimensions differ: " + std::to_string(fn.dim) + " vs " +
              std::to_string(fa.dim));

  CorrespondenceSelection sel;
  sel.normal = greedy_coreset(fn, N, derive_seed(seed, "cds:normal"));

  std::size_t candidates = 2 * N;
  if (fa.rows() < candidates) {
    warn("anomalous pool has " + std::to_string(fa.rows()) + " features, fewer than 2N=" +
         std::to_string(candidates) + "; using all of them as candidates");
    candidates = fa.rows();
  }
  sel.candidates = greedy_coreset(fa, candidates, derive_seed(seed, "cds:candidates"));

  // F_cor: the nearest candidate of every normal support vector, as a set.
  const FeatureSet cand = fa.select(sel.candidates);
  std::vector<std::uint32_t> hit(sel.normal.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < sel.normal.size(); ++i) hit[i] = nearest_row(cand, fn.row(sel.normal[i])).index;
  std::vector<char> removed(cand.rows(), 0);
  for (auto h : hit) removed[h] = 1;
  for (std::size_t c = 0; c < cand.rows(); ++c)
    if (removed[c]) sel.cor.push_back(sel.candidates[c]);
  std::sort(sel.cor.begin(), sel.cor.end());

  std::vector<std::uint32_t> remainder;
  for (std::size_t c = 0; c < cand.rows(); ++c)
    if (!removed[c]) remainder.push_back(sel.candidates[c]);

  if (remainder.size() > N) {
    const FeatureSet rem = fa.select(remainder);
    const auto keep = greedy_coreset(rem, N, derive_seed(seed, "cds:trim"));
    for (auto k : keep) sel.anomalous.push_back(remainder[k]);
  } else {
    if (remainder.size() < N)
      warn("refined anomalous support has " + std::to_string(remainder.size()) + " vectors, fewer than N=" +
           std::to_string(N));
    sel.anomalous = std::move(remainder);
  }
  return sel;
}

DualSupport correspondence_subsample(const FeatureSet& fn, const std::vector<Provenance>& prov_n,
                                     const FeatureSet& fa, const std::vector<Provenance>& prov_a, std::size_t N,
                                     std::uint64_t seed) {
  const auto sel = correspondence_select(fn, fa, N, seed);
  DualSupport ds;
  ds.normal = make_support(fn, prov_n, sel.normal, Strategy::correspondence, seed);
  ds.anomalous = make_support(fa, prov_a, sel.anomalous, Strategy::correspondence, seed);
  ds.removed_cor = sel.cor.size();
  ds.cfg.N = N;
  ds.cfg.seed = seed;
  ds.cfg.strategy = Strategy::correspondence;
  return ds;
}

}  // namespace pcad
