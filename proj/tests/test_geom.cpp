#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "pcad/error.hpp"
#include "pcad/geom/io.hpp"
#include "pcad/geom/normals.hpp"
#include "pcad/geom/sampling.hpp"
#include "pcad/geom/spatial_index.hpp"
#include "pcad/reference.hpp"
#include "pcad/synth/synth.hpp"
#include "test_util.hpp"

using namespace pcad;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

void check_knn_matches(const std::vector<Vec3>& pts, const SpatialIndex& index, const Vec3& q, std::size_t k) {
  const auto got = index.knn(q, k);
  const auto want = reference::knn(pts, q, k);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].index == want[i].index);
    CHECK(got[i].distance == std::sqrt(want[i].d2));
  }
}

}  // namespace

TEST_SUITE("geom") {

TEST_CASE("xyz parsing with and without a label sidecar") {
  testing::TempDir dir("io");
  write_text(dir.str("a.xyz"), "0 0 0\n1 0 0\n0 1 0\n");
  auto c = load_cloud(dir.str("a.xyz"));
  CHECK(c.size() == 3);
  CHECK_FALSE(c.has_normals());
  CHECK_FALSE(c.has_labels());

  write_text(dir.str("a.labels"), "0\n1\n0\n");
  c = load_cloud(dir.str("a.xyz"));
  CHECK(c.labels == std::vector<std::uint8_t>{0, 1, 0});

  write_text(dir.str("a.labels"), "0\n1\n");
  CHECK_THROWS_AS(load_cloud(dir.str("a.xyz")), Error);
}

TEST_CASE("xyz parse errors name the line") {
  testing::TempDir dir("io");
  write_text(dir.str("bad.xyz"), "0 0 0\n1 zero 0\n");
  try {
    load_cloud(dir.str("bad.xyz"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("xyzn and ascii ply round-trip") {
  testing::TempDir dir("io");
  LabeledCloud c;
  c.points = testing::random_points(20, 1);
  for (const auto& p : c.points) c.normals.push_back(p.normalized());
  save_cloud(c, dir.str("c.xyzn"), CloudFormat::xyzn);
  const auto back = load_cloud(dir.str("c.xyzn"));
  REQUIRE(back.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(back.points[i] == c.points[i]);
    CHECK((back.normals[i] - c.normals[i]).norm() <= 1e-15);
  }
  write_text(dir.str("p.ply"),
             "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
             "property float nx\nproperty float ny\nproperty float nz\nend_header\n1 2 3 0 0 1\n4 5 6 1 0 0\n");
  const auto ply = load_cloud(dir.str("p.ply"));
  REQUIRE(ply.size() == 2);
  CHECK(ply.points[1] == Vec3(4, 5, 6));
  CHECK(ply.normals[0] == Vec3(0, 0, 1));
}

TEST_CASE("score sidecars") {
  testing::TempDir dir("io");
  LabeledCloud c;
  c.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const std::vector<double> s{0.1, 0.2, 0.3};
  save_scores(c, s, dir.str("c.scores"));
  std::ifstream f(dir.str("c.scores"));
  std::size_t lines = 0;
  for (std::string l; std::getline(f, l);) ++lines;
  CHECK(lines == 3);
  const auto back = load_scores(dir.str("c.scores"));
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(back[i] - s[i]) <= 1e-9);
  const std::vector<double> two{0.1, 0.2};
  CHECK_THROWS_AS(save_scores(c, two, dir.str("d.scores")), Error);
}

TEST_CASE("knn worked examples") {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(3, 0, 0)};
  SpatialIndex index(pts);
  const auto nb = index.knn(Vec3(0.9, 0, 0), 2);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0].index == 1);
  CHECK(nb[1].index == 0);
  CHECK(nb[0].distance == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(nb[1].distance == doctest::Approx(0.9).epsilon(1e-12));

  const auto self = index.knn(pts[2], 1);
  CHECK(self[0].index == 2);
  CHECK(self[0].distance == 0.0);

  std::vector<Vec3> tie(6, Vec3(50, 50, 50));
  tie[5] = Vec3(1, 0, 0);
  tie[2] = Vec3(-1, 0, 0);
  SpatialIndex tie_index(tie);
  const auto t = tie_index.knn(Vec3(0, 0, 0), 2);
  CHECK(t[0].index == 2);
  CHECK(t[1].index == 5);
}

TEST_CASE("single point and duplicate points") {
  const std::vector<Vec3> one{Vec3(1, 2, 3)};
  SpatialIndex index(one);
  CHECK(index.knn(Vec3(9, 9, 9), 1)[0].index == 0);
  CHECK(index.radius(Vec3(1, 2, 3), 0.0).size() == 1);

  const std::vector<Vec3> dup{Vec3(5, 5, 5), Vec3(0, 0, 0), Vec3(0, 0, 0)};
  SpatialIndex d(dup);
  const auto nb = d.knn(Vec3(0, 0, 0), 2);
  CHECK(nb[0].index == 1);
  CHECK(nb[1].index == 2);
  CHECK_THROWS_AS(d.knn(Vec3(0, 0, 0), 4), Error);
}

TEST_CASE("knn and radius equal brute force on random and tied clouds") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t n = seed % 2 ? 2000 : 100;
    const auto pts = seed < 3 ? testing::random_points(n, seed) : testing::lattice_points(n, seed, 4);
    SpatialIndex index(pts);
    const auto queries = testing::random_points(20, seed + 100);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const std::size_t k = 1 + (q * 7) % 50;
      check_knn_matches(pts, index, queries[q], k);
      check_knn_matches(pts, index, pts[(q * 37) % n], k);
      const double r = 0.1 + 0.05 * static_cast<double>(q % 5);
      const auto got = index.radius(queries[q] * 4.0, r * 4.0);
      const auto want = reference::radius(pts, queries[q] * 4.0, r * 4.0);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].index == want[i].index);
    }
  }
}

TEST_CASE("neighbor table rows drop the point itself") {
  const auto pts = testing::lattice_points(300, 11, 3);
  SpatialIndex index(pts);
  const auto table = build_neighbor_table(pts, index, 10);
  REQUIRE(table.rows() == 300);
  for (std::size_t i = 0; i < 300; ++i) {
    std::vector<std::uint32_t> want;
    for (const auto& nb : reference::knn(pts, pts[i], 11))
      if (nb.index != i && want.size() < 10) want.push_back(nb.index);
    const auto row = table.row(i);
    CHECK(std::vector<std::uint32_t>(row.begin(), row.end()) == want);
  }
}

TEST_CASE("normals of a plane are vertical and oriented outward") {
  std::vector<Vec3> pts;
  for (int x = -5; x <= 5; ++x)
    for (int y = -5; y <= 5; ++y) pts.emplace_back(0.1 * x, 0.1 * y, 0.0);
  pts.emplace_back(0.0, 0.0, -3.0);  // pulls the centroid below the plane
  SpatialIndex index(pts);
  const auto n = estimate_normals(pts, index, 8);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    CHECK(std::abs(std::abs(n[i].z()) - 1.0) < 1e-9);
    CHECK(n[i].z() > 0.0);
  }
}

TEST_CASE("sphere normals are radial") {
  const auto sphere = gen_shape({Primitive::sphere, 3000, 0.0, 5});
  LabeledCloud bare;
  bare.points = sphere.points;
  const auto est = estimate_normals(bare, 20);
  const double cos10 = std::cos(10.0 * std::numbers::pi / 180.0);
  for (std::size_t i = 0; i < est.size(); ++i) CHECK(est.normals[i].dot(sphere.points[i].normalized()) >= cos10);
}

TEST_CASE("coincident neighborhood gets the fixed normal") {
  std::vector<Vec3> pts(5, Vec3(1, 1, 1));
  for (int i = 0; i < 10; ++i) pts.emplace_back(i, 0.5 * i, 2.0);
  SpatialIndex index(pts);
  const auto n = estimate_normals(pts, index, 4);
  for (int i = 0; i < 5; ++i) CHECK(n[i] == Vec3(0, 0, 1));
}

TEST_CASE("normals equal the brute-force reference") {
  const auto pts = testing::random_points(400, 3);
  SpatialIndex index(pts);
  const auto n = estimate_normals(pts, index, 12);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 r = reference::normal(pts, i, 12);
    CHECK((n[i] - r).norm() < 1e-9);
  }
}

TEST_CASE("normals are rotation-equivariant up to sign") {
  const auto torus = gen_shape({Primitive::torus, 2000, 0.0, 9});
  const Eigen::Matrix3d R = testing::fixed_rotation();
  std::vector<Vec3> rotated;
  for (const auto& p : torus.points) rotated.push_back(R * p + Vec3(3, -1, 2));
  SpatialIndex a(torus.points), b(rotated);
  const auto na = estimate_normals(torus.points, a, 20);
  const auto nb = estimate_normals(rotated, b, 20);
  for (std::size_t i = 0; i < na.size(); ++i) {
    const Vec3 ra = R * na[i];
    CHECK(std::min((ra - nb[i]).norm(), (ra + nb[i]).norm()) < 1e-5);
  }
}

TEST_CASE("farthest point sampling examples") {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(5, 0, 0)};
  CHECK(farthest_point_sample_from(pts, 2, 0) == std::vector<std::uint32_t>{0, 1});

  const auto cloud = testing::random_points(64, 4);
  auto all = farthest_point_sample(cloud, 64, 99);
  std::sort(all.begin(), all.end());
  for (std::uint32_t i = 0; i < 64; ++i) CHECK(all[i] == i);

  CHECK(farthest_point_sample(cloud, 10, 5) == farthest_point_sample(cloud, 10, 5));
  CHECK(farthest_point_sample(cloud, 10, 5).front() == fps_first_index(64, 5));
}

TEST_CASE("farthest point sampling equals the definition") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto pts = seed % 2 ? testing::lattice_points(500, seed, 3) : testing::random_points(50, seed);
    const std::size_t g = seed % 2 ? 50 : 10;
    const auto got = farthest_point_sample(pts, g, seed);
    CHECK(got == reference::fps(pts, g, got.front()));
  }
}

}  // TEST_SUITE
