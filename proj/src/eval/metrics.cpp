#include "pcad/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "pcad/error.hpp"

namespace pcad {

namespace {

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels, const char* what) {
  if (scores.size() != labels.size())
    fail_usage(std::string(what) + ": " + std::to_string(scores.size()) + " scores but " +
               std::to_string(labels.size()) + " labels");
  for (double s : scores)
    if (std::isnan(s)) fail_data(std::string(what) + ": NaN score");
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels, "auroc");
  std::size_t n1 = 0;
  for (auto l : labels) n1 += l != 0;
  const std::size_t n0 = labels.size() - n1;
  if (n1 == 0 || n0 == 0) fail_data("auroc is undefined: only one class present");

  const auto order = order_by_score(scores, false);
  // Sum of midranks of the positives, with ranks starting at 1.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) rank_sum += midrank;
    i = j;
  }
  const double u = rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
  return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels, "auprc");
  std::size_t total_pos = 0;
  for (auto l : labels) total_pos += l != 0;
  if (total_pos == 0) fail_data("auprc is undefined: no positive labels");

  const auto order = order_by_score(scores, true);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, i = 0;
  while (i < order.size()) {
    std::size_t j = i, block_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      block_pos += labels[order[j]] != 0;
      ++j;
    }
    tp += block_pos;
    seen = j;
    if (block_pos > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(seen);
      ap += (static_cast<double>(block_pos) / static_cast<double>(total_pos)) * precision;
    }
    i = j;
  }
  return ap;
}

double silhouette(const FeatureSet& features, std::span<const int> groups) {
  const std::size_t n = features.rows();
  if (groups.size() != n)
    fail_usage("silhouette: " + std::to_string(n) + " vectors but " + std::to_string(groups.size()) + " groups");
  std::map<int, std::size_t> index_of;
  for (int g : groups) index_of.emplace(g, 0);
  if (index_of.size() < 2) fail_usage("silhouette needs at least two groups");
  std::size_t next = 0;
  for (auto& [g, idx] : index_of) idx = next++;
  const std::size_t ng = index_of.size();
  std::vector<std::size_t> gid(n), count(ng, 0);
  for (std::size_t i = 0; i < n; ++i) {
    gid[i] = index_of[groups[i]];
    ++count[gid[i]];
  }

  std::vector<double> s(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    if (count[gid[i]] < 2) continue;
    std::vector<double> sum(ng, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[gid[j]] += std::sqrt(sq_distance(features.row(i), features.row(j)));
    const double a = sum[gid[i]] / static_cast<double>(count[gid[i]] - 1);
    double b = INFINITY;
    for (std::size_t g = 0; g < ng; ++g)
      if (g != gid[i]) b = std::min(b, sum[g] / static_cast<double>(count[g]));
    const double m = std::max(a, b);
    s[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(n);
}

}  // namespace pcad
