#include "pcad/reference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace pcad::reference {

namespace {

double d2(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

bool by_distance(const IndexedDistance& a, const IndexedDistance& b) {
  return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

// Explicit edge scan: bin b covers [lo + b*w, lo + (b+1)*w).
std::size_t bin_of(double value, double lo, double hi) {
  const double w = (hi - lo) / 11.0;
  if (value <= lo) return 0;
  for (std::size_t b = 0; b < 11; ++b)
    if (value < lo + static_cast<double>(b + 1) * w) return b;
  return 10;
}

}  // namespace

std::vector<IndexedDistance> knn(std::span<const Vec3> points, const Vec3& query, std::size_t k) {
  std::vector<IndexedDistance> all;
  for (std::size_t i = 0; i < points.size(); ++i)
    all.push_back({static_cast<std::uint32_t>(i), d2(points[i], query)});
  std::sort(all.begin(), all.end(), by_distance);
  all.resize(std::min(k, all.size()));
  return all;
}

std::vector<IndexedDistance> radius(std::span<const Vec3> points, const Vec3& query, double r) {
  std::vector<IndexedDistance> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = d2(points[i], query);
    if (v <= r * r) out.push_back({static_cast<std::uint32_t>(i), v});
  }
  std::sort(out.begin(), out.end(), by_distance);
  return out;
}

std::vector<std::uint32_t> fps(std::span<const Vec3> points, std::size_t g, std::uint32_t first) {
  std::vector<std::uint32_t> sel{first};
  std::vector<bool> taken(points.size(), false);
  taken[first] = true;
  while (sel.size() < std::min(g, points.size())) {
    double best = -1.0;
    std::uint32_t arg = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      double m = std::numeric_limits<double>::infinity();
      for (auto s : sel) m = std::min(m, d2(points[i], points[s]));
      if (m > best) {
        best = m;
        arg = static_cast<std::uint32_t>(i);
      }
    }
    sel.push_back(arg);
    taken[arg] = true;
  }
  return sel;
}

std::vector<std::uint32_t> greedy(const FeatureSet& f, std::size_t k, std::uint32_t first) {
  const std::size_t n = f.rows();
  std::vector<std::uint32_t> sel{first};
  std::vector<bool> taken(n, false);
  taken[first] = true;
  while (sel.size() < std::min(k, n)) {
    double best = -1.0;
    std::uint32_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double m = std::numeric_limits<double>::infinity();
      for (auto s : sel) m = std::min(m, sq_distance(f.row(i), f.row(s)));
      if (m > best) {
        best = m;
        arg = static_cast<std::uint32_t>(i);
      }
    }
    sel.push_back(arg);
    taken[arg] = true;
  }
  return sel;
}

Vec3 normal(std::span<const Vec3> points, std::size_t i, std::size_t k) {
  const auto nb = knn(points, points[i], k);
  Vec3 c = Vec3::Zero();
  for (const auto& n : nb) c += points[n.index];
  c /= static_cast<double>(nb.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& n : nb) {
    const Vec3 d = points[n.index] - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Vec3 nrm = es.eigenvectors().col(0);
  Vec3 cloud_center = Vec3::Zero();
  for (const auto& p : points) cloud_center += p;
  cloud_center /= static_cast<double>(points.size());
  if (nrm.dot(cloud_center - points[i]) > 0.0) nrm = -nrm;
  return nrm;
}

std::array<double, 33> spfh(std::span<const Vec3> points, std::span<const Vec3> normals, std::size_t s,
                            std::span<const std::uint32_t> neighbors) {
  const double pi = std::numbers::pi;
  std::array<double, 33> h{};
  std::size_t valid = 0;
  for (std::uint32_t t : neighbors) {
    const Vec3 diff = points[t] - points[s];
    const double len = std::sqrt(diff.squaredNorm());
    if (len == 0.0) continue;
    const Vec3 dir = diff / len;
    const Vec3 u = normals[s];
    const Vec3 vraw(dir.y() * u.z() - dir.z() * u.y(), dir.z() * u.x() - dir.x() * u.z(),
                    dir.x() * u.y() - dir.y() * u.x());
    const double vlen = std::sqrt(vraw.squaredNorm());
    if (vlen <= 1e-12) continue;
    const Vec3 v = vraw / vlen;
    const Vec3 w(u.y() * v.z() - u.z() * v.y(), u.z() * v.x() - u.x() * v.z(), u.x() * v.y() - u.y() * v.x());
    const Vec3& nt = normals[t];
    const double alpha = v.dot(nt);
    const double phi = u.dot(dir);
    const double theta = std::atan2(w.dot(nt), u.dot(nt));
    h[bin_of(alpha, -1.0, 1.0)] += 1.0;
    h[11 + bin_of(phi, -1.0, 1.0)] += 1.0;
    h[22 + bin_of(theta, -pi, pi)] += 1.0;
    ++valid;
  }
  if (valid > 0)
    for (auto& x : h) x = x * 100.0 / static_cast<double>(valid);
  return h;
}

std::vector<std::array<double, 33>> fpfh(std::span<const Vec3> points, std::span<const Vec3> normals,
                                         std::size_t k) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::uint32_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& nb : knn(points, points[i], k + 1))
      if (nb.index != i && nbrs[i].size() < k) nbrs[i].push_back(nb.index);
  std::vector<std::array<double, 33>> sp(n);
  for (std::size_t i = 0; i < n; ++i) sp[i] = spfh(points, normals, i, nbrs[i]);
  std::vector<std::array<double, 33>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 33> sum{};
    for (auto t : nbrs[i]) {
      const double dist = (points[t] - points[i]).norm();
      if (dist == 0.0) continue;
      for (std::size_t b = 0; b < 33; ++b) sum[b] += sp[t][b] / dist;
    }
    for (std::size_t b = 0; b < 33; ++b) out[i][b] = sp[i][b] + sum[b] / static_cast<double>(k);
  }
  return out;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / pairs;
}

double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  double positives = 0.0;
  for (auto l : labels) positives += l ? 1.0 : 0.0;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, predicted = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= t) {
        predicted += 1.0;
        tp += labels[i] ? 1.0 : 0.0;
      }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

double silhouette(const FeatureSet& f, std::span<const int> groups) {
  const std::size_t n = f.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, std::size_t>> acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto& [sum, count] = acc[groups[j]];
      sum += std::sqrt(sq_distance(f.row(i), f.row(j)));
      ++count;
    }
    const auto own = acc.find(groups[i]);
    if (own == acc.end()) continue;  // singleton group
    const double a = own->second.first / static_cast<double>(own->second.second);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [g, sc] : acc)
      if (g != groups[i]) b = std::min(b, sc.first / static_cast<double>(sc.second));
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

double reweighted_distance(std::span<const float> f, std::size_t q, const FeatureSet& support, std::size_t K) {
  std::vector<std::pair<double, std::size_t>> others;
  for (std::size_t i = 0; i < support.rows(); ++i)
    if (i != q) others.emplace_back(sq_distance(support.row(i), support.row(q)), i);
  std::sort(others.begin(), others.end());
  std::vector<std::size_t> nbhd{q};
  for (std::size_t i = 0; i + 1 < K && i < others.size(); ++i) nbhd.push_back(others[i].second);
  const double dq = std::sqrt(sq_distance(f, support.row(q)));
  double denom = 0.0;
  for (auto m : nbhd) denom += std::exp(std::sqrt(sq_distance(f, support.row(m))));
  return (1.0 - std::exp(dq) / denom) * dq;
}

}  // namespace pcad::reference
