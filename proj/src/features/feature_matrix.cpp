#include "pcad/features/feature_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "pcad/binary_io.hpp"
#include "pcad/error.hpp"
#include "pcad/geom/normals.hpp"
#include "pcad/geom/sampling.hpp"
#include "pcad/rng.hpp"

namespace pcad {

void FeatureMatrix::validate() const {
  if (dim == 0) fail_data("feature matrix has zero dimension");
  if (values.size() != center_indices.size() * dim)
    fail_data("feature matrix holds " + std::to_string(values.size()) + " values for " +
              std::to_string(center_indices.size()) + " rows of dimension " + std::to_string(dim));
  if (!scales.empty() && dim != kFpfhDim * scales.size())
    fail_data("feature dimension " + std::to_string(dim) + " does not match " + std::to_string(scales.size()) +
              " scales");
  for (float v : values)
    if (!std::isfinite(v) || v < 0.0f) fail_data("feature matrix entry is negative or non-finite");
}

FeatureMatrix aggregate_at_centers(const PointFeatures& features, std::span<const Vec3> points,
                                   const SpatialIndex& index, std::span<const std::uint32_t> centers,
                                   std::size_t m) {
  if (m == 0) fail_usage("aggregation needs m >= 1");
  if (m > points.size())
    fail_usage("aggregation: m=" + std::to_string(m) + " exceeds the " + std::to_string(points.size()) +
               " points");
  if (features.rows() != points.size()) fail_data("per-point features do not match the cloud size");
  for (auto c : centers)
    if (c >= points.size()) fail_usage("aggregation: center index out of range");

  FeatureMatrix out;
  out.dim = features.dim;
  out.aggregation_m = m;
  out.center_indices.assign(centers.begin(), centers.end());
  out.values.resize(centers.size() * out.dim);
  const double inv_m = 1.0 / static_cast<double>(m);
#pragma omp parallel
  {
    std::vector<Neighbor> nb;
    std::vector<double> acc(out.dim);
#pragma omp for schedule(dynamic, 16)
    for (std::size_t r = 0; r < centers.size(); ++r) {
      index.knn_into(points[centers[r]], m, nb);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const auto& n : nb) {
        const auto src = features.row(n.index);
        for (std::size_t j = 0; j < out.dim; ++j) acc[j] += src[j];
      }
      float* dst = out.values.data() + r * out.dim;
      for (std::size_t j = 0; j < out.dim; ++j) dst[j] = static_cast<float>(acc[j] * inv_m);
    }
  }
  return out;
}

FeatureMatrix aggregate_at_centers(const PointFeatures& features, const LabeledCloud& cloud,
                                   std::span<const std::uint32_t> centers, std::size_t m) {
  cloud.validate();
  SpatialIndex index(cloud.points);
  auto out = aggregate_at_centers(features, cloud.points, index, centers, m);
  out.sample_id = cloud.sample_id;
  return out;
}

void normalize_blocks(FeatureMatrix& matrix) {
  const std::size_t blocks = matrix.dim / kFpfhDim;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    float* row = matrix.values.data() + r * matrix.dim;
    for (std::size_t b = 0; b < blocks; ++b) {
      float* blk = row + b * kFpfhDim;
      double ss = 0.0;
      for (std::size_t j = 0; j < kFpfhDim; ++j) ss += static_cast<double>(blk[j]) * blk[j];
      if (!(ss > 0.0)) continue;
      const double inv = 1.0 / std::sqrt(ss);
      for (std::size_t j = 0; j < kFpfhDim; ++j) blk[j] = static_cast<float>(blk[j] * inv);
    }
  }
}

std::uint64_t fps_seed(const RunConfig& cfg, const std::string& sample_id) {
  return derive_seed(cfg.seed, "fps:" + sample_id);
}

namespace {

struct Extracted {
  FeatureMatrix matrix;
  std::vector<Vec3> center_points;
};

Extracted extract_impl(const LabeledCloud& cloud, const RunConfig& cfg, const SpatialIndex& index) {
  cfg.validate();
  const auto normals = estimate_normals(cloud.points, index, cfg.normal_k);
  const auto fpfh = compute_multiscale_fpfh(cloud.points, normals, index, cfg.scales);
  const std::size_t g = std::min(cfg.centers_G, cloud.size());
  const auto centers = farthest_point_sample(cloud.points, g, fps_seed(cfg, cloud.sample_id));
  Extracted out;
  out.matrix = aggregate_at_centers(fpfh.features, cloud.points, index, centers, cfg.aggregation_m);
  out.matrix.scales = cfg.scales;
  out.matrix.sample_id = cloud.sample_id;
  if (cfg.feature_norm == FeatureNorm::block_l2) normalize_blocks(out.matrix);
  out.center_points.reserve(centers.size());
  for (auto c : centers) out.center_points.push_back(cloud.points[c]);
  return out;
}

}  // namespace

FeatureMatrix extract_features(const LabeledCloud& cloud, const RunConfig& cfg) {
  cloud.validate();
  SpatialIndex index(cloud.points);
  return extract_impl(cloud, cfg, index).matrix;
}

SampleFeatures extract_sample_features(const LabeledCloud& cloud, const RunConfig& cfg) {
  cloud.validate();
  SpatialIndex index(cloud.points);
  auto ex = extract_impl(cloud, cfg, index);

  SampleFeatures sf;
  sf.point_count = cloud.size();
  const std::size_t g = ex.center_points.size();
  SpatialIndex center_index(ex.center_points);
  sf.links_per_point = cfg.propagation == Propagation::idw3 ? std::min<std::size_t>(3, g) : 1;
  const std::size_t L = sf.links_per_point;
  sf.point_links.resize(cloud.size() * L);
  sf.point_weights.resize(cloud.size() * L);
#pragma omp parallel
  {
    std::vector<Neighbor> nb;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      center_index.knn_into(cloud.points[i], L, nb);
      double wsum = 0.0;
      std::array<double, 3> w{};
      const bool exact = nb[0].distance == 0.0;
      for (std::size_t j = 0; j < L; ++j) {
        w[j] = exact ? (j == 0 ? 1.0 : 0.0) : 1.0 / nb[j].distance;
        wsum += w[j];
      }
      for (std::size_t j = 0; j < L; ++j) {
        sf.point_links[i * L + j] = nb[j].index;
        sf.point_weights[i * L + j] = L == 1 ? 1.0 : w[j] / wsum;
      }
    }
  }

  if (cloud.has_labels()) {
    sf.center_touches_anomaly.assign(g, 0);
    std::vector<Neighbor> nb;
    for (std::size_t r = 0; r < g; ++r) {
      index.knn_into(ex.center_points[r], cfg.aggregation_m, nb);
      for (const auto& n : nb)
        if (cloud.labels[n.index]) {
          sf.center_touches_anomaly[r] = 1;
          break;
        }
    }
  }
  sf.matrix = std::move(ex.matrix);
  return sf;
}

namespace {
constexpr char kFeatMagic[8] = {'P', 'C', 'A', 'D', 'F', 'E', 'A', 'T'};
constexpr std::uint32_t kFeatVersion = 1;
}  // namespace

void save_feature_matrix(const FeatureMatrix& matrix, const std::string& path) {
  matrix.validate();
  bin::Writer w;
  w.bytes(kFeatMagic, sizeof kFeatMagic);
  w.uint<std::uint32_t>(kFeatVersion);
  w.uint<std::uint64_t>(matrix.rows());
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(matrix.dim));
  for (float v : matrix.values) w.f32(v);
  for (auto c : matrix.center_indices) w.uint<std::uint64_t>(c);
  bin::write_file(path, w.data());
}

FeatureMatrix load_feature_matrix(const std::string& path) {
  bin::Reader r(bin::read_file(path), path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kFeatMagic)) fail_data(path + ": not a feature dump (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version != kFeatVersion)
    fail_data(path + ": feature dump version " + std::to_string(version) + " is not supported (expected " +
              std::to_string(kFeatVersion) + ")");
  const auto g = r.uint<std::uint64_t>();
  const auto dim = r.uint<std::uint32_t>();
  if (dim == 0) fail_data(path + ": zero feature dimension");
  if (g > r.remaining() / (static_cast<std::uint64_t>(dim) * 4 + 8)) r.need(r.remaining() + 1);
  r.need(g * dim * 4 + g * 8);
  FeatureMatrix m;
  m.dim = dim;
  m.values.resize(g * dim);
  for (auto& v : m.values) v = r.f32();
  m.center_indices.resize(g);
  for (auto& c : m.center_indices) c = static_cast<std::uint32_t>(r.uint<std::uint64_t>());
  if (r.remaining() != 0) fail_data(path + ": trailing bytes after feature dump");
  return m;
}

}  // namespace pcad
