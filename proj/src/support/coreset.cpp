#include "pcad/support/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <omp.h>

#include "pcad/error.hpp"
#include "pcad/rng.hpp"

namespace pcad {

void FeatureSet::append(std::span<const float> v) {
  if (dim == 0) dim = v.size();
  if (v.size() != dim)
    fail_data("feature dimension mismatch: " + std::to_string(v.size()) + " vs " + std::to_string(dim));
  values.insert(values.end(), v.begin(), v.end());
}

FeatureSet FeatureSet::select(std::span<const std::uint32_t> indices) const {
  FeatureSet out;
  out.dim = dim;
  out.values.reserve(indices.size() * dim);
  for (auto i : indices) {
    auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

Nearest nearest_row(const FeatureSet& set, std::span<const float> q) {
  if (set.empty()) fail_internal("nearest_row on an empty set");
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < set.rows(); ++i) {
    const double d2 = sq_distance(set.values.data() + i * set.dim, q.data(), set.dim);
    if (d2 < best.d2) best = {static_cast<std::uint32_t>(i), d2};
  }
  return best;
}

namespace {

double sq_norm(const float* v, std::size_t dim) {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) s += static_cast<double>(v[j]) * static_cast<double>(v[j]);
  return s;
}

}  // namespace

std::vector<std::vector<Nearest>> nearest_k_rows(const FeatureSet& set, const float* queries, std::size_t count,
                                                 std::size_t k, const std::uint32_t* exclude) {
  if (set.empty()) fail_internal("nearest search on an empty set");
  const std::size_t n = set.rows(), dim = set.dim;
  if (k > n - (exclude ? 1 : 0)) fail_internal("nearest search: k exceeds the available rows");
  // Screen in float. A float dot product of length d is off by at most
  // d*2^-24*|q||b|, so the screened squared distance is within
  // d*2^-24*(|q|^2+|b|^2) of the exact one.
  using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using FloatMap = Eigen::Map<const Mat>;
  const auto rows = [&](const float* p, std::size_t r) {
    return FloatMap(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(dim));
  };
  const auto bank = rows(set.values.data(), n);
  std::vector<double> bank_sq(n);
  for (std::size_t i = 0; i < n; ++i) bank_sq[i] = sq_norm(set.values.data() + i * dim, dim);
  const double bank_sq_max = *std::max_element(bank_sq.begin(), bank_sq.end());
  const double rel_err = 4.0 * static_cast<double>(dim + 2) * 0x1p-24;

  std::vector<std::vector<Nearest>> out(count);
  if (k == 0) return out;
  constexpr std::size_t kBlock = 128;
  for (std::size_t b0 = 0; b0 < count; b0 += kBlock) {
    const std::size_t nb = std::min(kBlock, count - b0);
    const Mat q = rows(queries + b0 * dim, nb);
    const Mat dots = q * bank.transpose();
#pragma omp parallel
    {
      std::vector<double> approx(n), scratch;
      std::vector<Nearest> cand;
#pragma omp for schedule(static)
      for (std::size_t r = 0; r < nb; ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        const double q_sq = sq_norm(queries + (b0 + r) * dim, dim);
        const std::size_t skip = exclude ? exclude[b0 + r] : n;
        for (std::size_t i = 0; i < n; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          approx[i] = i == skip ? std::numeric_limits<double>::infinity() : q_sq + bank_sq[i] - 2.0 * dots(ri, ii);
        }
        // k-th smallest screened value; any exact top-k row screens within
        // twice the rounding bound of it.
        double kth;
        if (k == 1) {
          kth = *std::min_element(approx.begin(), approx.end());
        } else {
          scratch = approx;
          std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
          kth = scratch[k - 1];
        }
        const double limit = kth + rel_err * (q_sq + bank_sq_max) + 1e-300;
        const float* qp = queries + (b0 + r) * dim;
        cand.clear();
        for (std::size_t i = 0; i < n; ++i)
          if (approx[i] <= limit)
            cand.push_back({static_cast<std::uint32_t>(i), sq_distance(set.values.data() + i * dim, qp, dim)});
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                          [](const Nearest& a, const Nearest& b) { return a.d2 != b.d2 ? a.d2 < b.d2 : a.index < b.index; });
        out[b0 + r].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
  }
  return out;
}

std::vector<Nearest> nearest_rows(const FeatureSet& set, const float* queries, std::size_t count) {
  const auto all = nearest_k_rows(set, queries, count, 1);
  std::vector<Nearest> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = all[i].front();
  return out;
}

namespace {

// Farthest-first traversal. A point whose current center c lies farther than
// twice its radius from the new center cannot move closer (triangle
// inequality), so its distance is not recomputed. The margin keeps the skip
// exact under rounding: the selected sequence equals the plain scan.
template <typename T>
std::vector<std::uint32_t> greedy_impl(const T* data, std::size_t n, std::size_t dim, std::size_t k,
                                       std::uint32_t first) {
  if (k == 0) return {};
  constexpr double kSkipMargin = 1.0 + 1e-9;
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> owner(n, 0);  // position in `selected` of the closest center
  std::vector<std::uint32_t> selected;
  selected.reserve(k);
  selected.push_back(first);
  min_d2[first] = -1.0;
  std::vector<double> center_gap;
  center_gap.reserve(k);

  const int threads = omp_get_max_threads();
  std::vector<double> best_val(static_cast<std::size_t>(threads));
  std::vector<std::size_t> best_idx(static_cast<std::size_t>(threads));
  while (selected.size() < k) {
    const std::size_t j = selected.size() - 1;
    const T* last = data + static_cast<std::size_t>(selected.back()) * dim;
    center_gap.resize(j + 1);
    for (std::size_t a = 0; a < j; ++a)
      center_gap[a] = std::sqrt(sq_distance(data + static_cast<std::size_t>(selected[a]) * dim, last, dim));
    center_gap[j] = 0.0;
#pragma omp parallel num_threads(threads)
    {
      const auto t = static_cast<std::size_t>(omp_get_thread_num());
      double bv = -2.0;
      std::size_t bi = 0;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        double m = min_d2[i];
        if (m >= 0.0 && !(center_gap[owner[i]] > 2.0 * std::sqrt(m) * kSkipMargin)) {
          const double d2 = sq_distance(data + i * dim, last, dim);
          if (d2 < m) {
            m = min_d2[i] = d2;
            owner[i] = static_cast<std::uint32_t>(j);
          }
        }
        if (m > bv) {
          bv = m;
          bi = i;
        }
      }
      best_val[t] = bv;
      best_idx[t] = bi;
    }
    double bv = -2.0;
    std::size_t bi = 0;
    for (int t = 0; t < threads; ++t)
      if (best_val[t] > bv) {
        bv = best_val[t];
        bi = best_idx[t];
      }
    selected.push_back(static_cast<std::uint32_t>(bi));
    min_d2[bi] = -1.0;
  }
  return selected;
}

void check_k(std::size_t k, std::size_t n) {
  if (k > n)
    fail_usage("subsampling: k=" + std::to_string(k) + " exceeds the " + std::to_string(n) + " available vectors");
}

}  // namespace

std::uint32_t greedy_first_index(std::size_t n, std::uint64_t seed) {
  if (n == 0) fail_usage("greedy selection over an empty set");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return static_cast<std::uint32_t>(pick(rng));
}

std::vector<std::uint32_t> greedy_coreset_from(const FeatureSet& f, std::size_t k, std::uint32_t first) {
  check_k(k, f.rows());
  if (k > 0 && first >= f.rows()) fail_usage("greedy selection: first index out of range");
  return greedy_impl(f.values.data(), f.rows(), f.dim, k, first);
}

std::vector<std::uint32_t> greedy_coreset(const FeatureSet& f, std::size_t k, std::uint64_t seed) {
  check_k(k, f.rows());
  if (k == 0) return {};
  return greedy_impl(f.values.data(), f.rows(), f.dim, k, greedy_first_index(f.rows(), seed));
}

std::vector<double> random_projection(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "projection"));
  std::normal_distribution<double> g(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(out_dim));
  std::vector<double> m(in_dim * out_dim);
  for (auto& v : m) v = g(rng) * scale;
  return m;
}

std::vector<std::uint32_t> greedy_coreset_with_projection(const FeatureSet& f, std::size_t k,
                                                          std::span<const double> proj, std::size_t proj_dim,
                                                          std::uint64_t seed) {
  check_k(k, f.rows());
  if (proj_dim == 0 || proj.size() != proj_dim * f.dim)
    fail_usage("projection matrix must be proj_dim x " + std::to_string(f.dim));
  if (k == 0) return {};
  const std::size_t n = f.rows();
  std::vector<double> images(n * proj_dim);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = f.values.data() + i * f.dim;
    for (std::size_t r = 0; r < proj_dim; ++r) {
      const double* p = proj.data() + r * f.dim;
      double acc = 0.0;
      for (std::size_t j = 0; j < f.dim; ++j) acc += p[j] * static_cast<double>(x[j]);
      images[i * proj_dim + r] = acc;
    }
  }
  return greedy_impl(images.data(), n, proj_dim, k, greedy_first_index(n, seed));
}

std::vector<std::uint32_t> greedy_coreset_projected(const FeatureSet& f, std::size_t k, std::size_t proj_dim,
                                                    std::uint64_t seed) {
  if (proj_dim == 0 || proj_dim > f.dim)
    fail_usage("proj_dim must lie in [1, " + std::to_string(f.dim) + "]");
  return greedy_coreset_with_projection(f, k, random_projection(f.dim, proj_dim, seed), proj_dim, seed);
}

double coverage_radius(const FeatureSet& f, std::span<const std::uint32_t> selected) {
  if (selected.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::size_t i = 0; i < f.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (auto s : selected) best = std::min(best, sq_distance(f.values.data() + i * f.dim, f.values.data() + static_cast<std::size_t>(s) * f.dim, f.dim));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

std::vector<std::uint32_t> random_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_k(k, n);
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  std::vector<std::uint32_t> out;
  out.reserve(k);
  Rng rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
  return out;
}

std::vector<std::uint32_t> select_indices(const FeatureSet& f, std::size_t k, Strategy strategy,
                                          std::uint64_t seed, std::size_t proj_dim) {
  switch (strategy) {
    case Strategy::identity: {
      std::vector<std::uint32_t> all(f.rows());
      std::iota(all.begin(), all.end(), 0u);
      return all;
    }
    case Strategy::random: return random_subset(f.rows(), k, seed);
    case Strategy::greedy: return greedy_coreset(f, k, seed);
    case Strategy::greedy_projected: return greedy_coreset_projected(f, k, std::min(proj_dim, f.dim), seed);
    case Strategy::correspondence: break;
  }
  fail_usage("correspondence subsampling needs both pools; use correspondence_subsample()");
}

}  // namespace pcad
