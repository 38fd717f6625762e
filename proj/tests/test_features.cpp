#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pcad/binary_io.hpp"
#include "pcad/error.hpp"
#include "pcad/features/feature_matrix.hpp"
#include "pcad/features/fpfh.hpp"
#include "pcad/geom/normals.hpp"
#include "pcad/geom/sampling.hpp"
#include "pcad/reference.hpp"
#include "pcad/synth/synth.hpp"
#include "test_util.hpp"

using namespace pcad;

namespace {

LabeledCloud random_oriented_cloud(std::size_t n, std::uint64_t seed) {
  LabeledCloud c;
  c.points = testing::random_points(n, seed);
  const auto dirs = testing::random_points(n, seed + 1000);
  for (const auto& d : dirs) c.normals.push_back(d.normalized());
  return c;
}

LabeledCloud smooth_cloud(std::size_t n, std::uint64_t seed) {
  LabeledCloud c = gen_shape({Primitive::torus, n, 0.0, seed});
  c.normals.clear();
  return estimate_normals(c, 20);
}

double block_sum(const Histogram33& h, std::size_t block) {
  double s = 0.0;
  for (std::size_t b = 0; b < kAngleBins; ++b) s += h[block * kAngleBins + b];
  return s;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("angle bins are half-open with a closed last bin") {
  CHECK(angle_bin(-1.0, -1.0, 1.0) == 0);
  CHECK(angle_bin(-5.0, -1.0, 1.0) == 0);
  CHECK(angle_bin(1.0, -1.0, 1.0) == 10);
  CHECK(angle_bin(7.0, -1.0, 1.0) == 10);
  CHECK(angle_bin(0.0, -1.0, 1.0) == 5);
  CHECK(angle_bin(-1.0 + 2.0 / 11.0 * 3.0 + 1e-12, -1.0, 1.0) == 3);
}

TEST_CASE("coplanar neighborhood puts all mass in the zero bins") {
  LabeledCloud c;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) {
      c.points.emplace_back(0.3 * x + 0.01 * y * y, 0.2 * y, 0.0);
      c.normals.emplace_back(0, 0, 1);
    }
  for (std::size_t p = 0; p < c.size(); p += 7) {
    const Spfh h = compute_spfh(c, p, 10);
    CHECK_FALSE(h.degenerate);
    CHECK(h.bins[5] == doctest::Approx(100.0));
    CHECK(h.bins[kAngleBins + 5] == doctest::Approx(100.0));
    CHECK(h.bins[2 * kAngleBins + 5] == doctest::Approx(100.0));
    for (std::size_t b = 0; b < 3; ++b) CHECK(block_sum(h.bins, b) == doctest::Approx(100.0).epsilon(1e-12));
  }
}

TEST_CASE("coincident neighbors give a degenerate zero SPFH") {
  LabeledCloud c;
  for (int i = 0; i < 4; ++i) {
    c.points.emplace_back(1, 1, 1);
    c.normals.emplace_back(0, 0, 1);
  }
  c.points.emplace_back(5, 5, 5);
  c.normals.emplace_back(0, 0, 1);
  const Spfh h = compute_spfh(c, 0, 3);
  CHECK(h.degenerate);
  for (double v : h.bins) CHECK(v == 0.0);
}

TEST_CASE("displacement along the source normal is skipped") {
  CHECK_FALSE(pair_angles(Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 2), Vec3(1, 0, 0)).has_value());
  CHECK_FALSE(pair_angles(Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 0), Vec3(1, 0, 0)).has_value());
  const auto a = pair_angles(Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 0, 1));
  REQUIRE(a.has_value());
  CHECK(a->alpha == 0.0);
  CHECK(a->phi == 0.0);
  CHECK(a->theta == 0.0);
}

TEST_CASE("SPFH sub-histograms sum to 100") {
  const auto c = random_oriented_cloud(150, 3);
  for (std::size_t p = 0; p < c.size(); p += 11) {
    const Spfh h = compute_spfh(c, p, 12);
    REQUIRE_FALSE(h.degenerate);
    for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(block_sum(h.bins, b) - 100.0) <= 1e-9);
  }
}

TEST_CASE("FPFH of two mirrored points is twice their SPFH") {
  LabeledCloud c;
  c.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  c.normals = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
  const auto f = compute_fpfh(c, 1);
  const Spfh h = compute_spfh(c, 0, 1);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t b = 0; b < kFpfhDim; ++b) CHECK(f.features.row(p)[b] == 2.0 * h.bins[b]);
}

TEST_CASE("FPFH with one neighbor at distance 2 halves the neighbor term") {
  LabeledCloud c;
  c.points = {Vec3(0, 0, 0), Vec3(2, 0, 0)};
  c.normals = {Vec3(0, 0, 1), Vec3(0, 0.6, 0.8)};
  const auto f = compute_fpfh(c, 1);
  const Spfh h0 = compute_spfh(c, 0, 1), h1 = compute_spfh(c, 1, 1);
  for (std::size_t b = 0; b < kFpfhDim; ++b) CHECK(f.features.row(0)[b] == h0.bins[b] + h1.bins[b] / 2.0);
}

TEST_CASE("FPFH equals the direct-formula reference") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = random_oriented_cloud(200, seed);
    const std::size_t k = 10 + seed;
    const auto got = compute_fpfh(c, k);
    const auto want = reference::fpfh(c.points, c.normals, k);
    double worst = 0.0;
    for (std::size_t p = 0; p < c.size(); ++p)
      for (std::size_t b = 0; b < kFpfhDim; ++b) worst = std::max(worst, std::abs(got.features.row(p)[b] - want[p][b]));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("multi-scale FPFH is the concatenation of single-scale runs") {
  const auto c = smooth_cloud(1000, 2);
  const std::size_t one[] = {40};
  const auto single40 = compute_fpfh(c, 40);
  CHECK(compute_multiscale_fpfh(c, one).features.values == single40.features.values);

  const std::size_t three[] = {40, 80, 120};
  const auto multi = compute_multiscale_fpfh(c, three);
  REQUIRE(multi.features.dim == 99);
  for (std::size_t s = 0; s < 3; ++s) {
    const auto single = compute_fpfh(c, three[s]);
    for (std::size_t p = 0; p < c.size(); ++p)
      for (std::size_t b = 0; b < kFpfhDim; ++b)
        CHECK(multi.features.row(p)[s * kFpfhDim + b] == single.features.row(p)[b]);
  }
}

TEST_CASE("scale larger than the cloud is rejected") {
  const auto c = random_oriented_cloud(500, 1);
  const std::size_t big[] = {2000};
  CHECK_THROWS_AS(compute_multiscale_fpfh(c, big), Error);
}

TEST_CASE("FPFH is invariant under rigid motion") {
  const auto c = smooth_cloud(2000, 4);
  const Eigen::Matrix3d R = testing::fixed_rotation();
  LabeledCloud moved;
  for (const auto& p : c.points) moved.points.push_back(R * p + Vec3(0.5, -2.0, 1.25));
  moved = estimate_normals(moved, 20);
  const std::size_t scales[] = {40, 80, 120};
  const auto a = compute_multiscale_fpfh(c, scales);
  const auto b = compute_multiscale_fpfh(moved, scales);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.features.values.size(); ++i)
    worst = std::max(worst, std::abs(a.features.values[i] - b.features.values[i]));
  CHECK(worst <= 1e-4);
}

TEST_CASE("aggregation is the mean over the m nearest points") {
  const auto pts = testing::random_points(300, 8);
  LabeledCloud c;
  c.points = pts;
  PointFeatures pf;
  pf.dim = 4;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int j = 0; j < 4; ++j) pf.values.push_back(static_cast<double>((i * 7 + j) % 13));
  const std::vector<std::uint32_t> centers{0, 17, 150, 299};

  const auto m16 = aggregate_at_centers(pf, c, centers, 16);
  for (std::size_t r = 0; r < centers.size(); ++r) {
    const auto nb = reference::knn(pts, pts[centers[r]], 16);
    for (std::size_t j = 0; j < 4; ++j) {
      double mean = 0.0;
      for (const auto& n : nb) mean += pf.row(n.index)[j];
      CHECK(m16.row(r)[j] == static_cast<float>(mean / 16.0));
    }
  }
  const auto m1 = aggregate_at_centers(pf, c, centers, 1);
  for (std::size_t r = 0; r < centers.size(); ++r)
    for (std::size_t j = 0; j < 4; ++j) CHECK(m1.row(r)[j] == static_cast<float>(pf.row(centers[r])[j]));

  PointFeatures constant;
  constant.dim = 2;
  for (std::size_t i = 0; i < pts.size(); ++i) constant.values.insert(constant.values.end(), {0.25, 3.0});
  const auto cm = aggregate_at_centers(constant, c, centers, 50);
  for (std::size_t r = 0; r < centers.size(); ++r) {
    CHECK(cm.row(r)[0] == 0.25f);
    CHECK(cm.row(r)[1] == 3.0f);
  }
}

TEST_CASE("extract_features: determinism, shape and invariants") {
  auto c = gen_shape({Primitive::cylinder, 1500, 0.0, 3});
  c.normals.clear();
  c.sample_id = "cyl";
  RunConfig cfg;
  cfg.centers_G = 64;
  const auto a = extract_features(c, cfg);
  const auto b = extract_features(c, cfg);
  CHECK(a.values == b.values);
  CHECK(a.center_indices == b.center_indices);
  CHECK(a.rows() == 64);
  CHECK(a.dim == 99);
  CHECK_NOTHROW(a.validate());

  cfg.centers_G = 1;
  CHECK(extract_features(c, cfg).rows() == 1);
  cfg.centers_G = 100000;
  CHECK(extract_features(c, cfg).rows() == c.size());
}

TEST_CASE("extract_features is invariant under rigid motion with pinned centers") {
  auto c = gen_shape({Primitive::torus, 2000, 0.0, 6});
  c.normals.clear();
  c.sample_id = "t";
  LabeledCloud moved = c;
  const Eigen::Matrix3d R = testing::fixed_rotation();
  for (auto& p : moved.points) p = R * p + Vec3(-1, 2, 0.5);
  RunConfig cfg;
  cfg.centers_G = 128;
  const auto a = extract_features(c, cfg);
  const auto b = extract_features(moved, cfg);
  REQUIRE(a.center_indices == b.center_indices);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, double(std::abs(a.values[i] - b.values[i])));
  CHECK(worst <= 1e-4);
}

TEST_CASE("block normalization gives unit blocks") {
  FeatureMatrix m;
  m.dim = 66;
  m.center_indices = {0, 1};
  m.values.assign(132, 0.0f);
  for (std::size_t j = 0; j < 33; ++j) m.values[j] = static_cast<float>(j);
  for (std::size_t j = 66; j < 132; ++j) m.values[j] = 2.0f;
  normalize_blocks(m);
  for (std::size_t blk = 0; blk < 4; ++blk) {
    double ss = 0.0;
    for (std::size_t j = 0; j < 33; ++j) ss += m.values[blk * 33 + j] * m.values[blk * 33 + j];
    if (blk == 1)
      CHECK(ss == 0.0);
    else
      CHECK(ss == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("feature dump round-trip and corruption") {
  testing::TempDir dir("feat");
  auto c = gen_shape({Primitive::sphere, 1200, 0.0, 1});
  c.normals.clear();
  RunConfig cfg;
  cfg.centers_G = 16;
  const auto m = extract_features(c, cfg);
  save_feature_matrix(m, dir.str("f.bin"));
  const auto back = load_feature_matrix(dir.str("f.bin"));
  CHECK(back.values == m.values);
  CHECK(back.center_indices == m.center_indices);
  CHECK(back.dim == m.dim);

  auto bytes = bin::read_file(dir.str("f.bin"));
  bytes.resize(bytes.size() - 5);
  bin::write_file(dir.str("t.bin"), bytes);
  CHECK_THROWS_AS(load_feature_matrix(dir.str("t.bin")), Error);
  bytes[0] = 'X';
  bin::write_file(dir.str("m.bin"), bytes);
  CHECK_THROWS_AS(load_feature_matrix(dir.str("m.bin")), Error);
}

}  // TEST_SUITE
