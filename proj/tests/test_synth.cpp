#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcad/error.hpp"
#include "pcad/eval/manifest.hpp"
#include "pcad/geom/io.hpp"
#include "pcad/synth/synth.hpp"
#include "test_util.hpp"

using namespace pcad;
namespace fs = std::filesystem;

namespace {

LabeledCloud grid_plane(int side) {
  LabeledCloud c;
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      c.points.emplace_back(0.01 * x, 0.01 * y, 0.0);
      c.normals.emplace_back(0, 0, 1);
    }
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("primitive sizes and surfaces") {
  const auto sphere = gen_shape({Primitive::sphere, 5000, 0.0, 1});
  CHECK(sphere.size() == 5000);
  for (const auto& p : sphere.points) CHECK(std::abs(p.norm() - 1.0) <= 1e-9);
  for (std::size_t i = 0; i < sphere.size(); ++i) CHECK(sphere.normals[i].dot(sphere.points[i]) > 0.999999);
  CHECK(sphere.labels == std::vector<std::uint8_t>(5000, 0));

  const auto washer = gen_shape({Primitive::washer, 3000, 0.0, 2});
  for (const auto& p : washer.points) {
    const double r = std::hypot(p.x(), p.y());
    CHECK(r >= shape_dims::kWasherInner - 1e-9);
    CHECK(r <= shape_dims::kWasherOuter + 1e-9);
    CHECK(std::abs(p.z()) <= shape_dims::kWasherHalfThickness + 1e-9);
  }

  const auto torus = gen_shape({Primitive::torus, 2000, 0.0, 3});
  for (const auto& p : torus.points) {
    const double ring = std::hypot(p.x(), p.y()) - shape_dims::kTorusMajor;
    CHECK(std::abs(std::hypot(ring, p.z()) - shape_dims::kTorusMinor) <= 1e-9);
  }
  for (auto prim : {Primitive::plane, Primitive::cylinder}) {
    const auto c = gen_shape({prim, 1500, 0.0, 4});
    CHECK(c.size() == 1500);
    for (const auto& n : c.normals) CHECK(std::abs(n.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("shapes are deterministic and seed-sensitive") {
  const ShapeSpec a{Primitive::cylinder, 2000, 0.5, 11};
  CHECK(gen_shape(a).points == gen_shape(a).points);
  ShapeSpec b = a;
  b.seed = 12;
  CHECK(gen_shape(a).points != gen_shape(b).points);
}

TEST_CASE("zero-magnitude limit leaves points in place") {
  const auto c = gen_shape({Primitive::sphere, 2000, 0.0, 5});
  DefectSpec spec{DefectKind::convex, 0.02, 1e-300, 3};
  const auto out = synthesize_anomaly(c, spec);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK((out.points[i] - c.points[i]).norm() <= 1e-12);
  std::size_t labeled = 0;
  for (auto l : out.labels) labeled += l;
  CHECK(labeled == 40);
}

TEST_CASE("convex bump on a plane peaks at magnitude times spacing") {
  const auto c = grid_plane(60);
  const DefectSpec spec{DefectKind::convex, 0.01, 5.0, 9};
  const auto out = synthesize_anomaly(c, spec);
  double zmax = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (out.labels[i]) {
      CHECK(out.points[i].z() > 0.0);
    } else {
      CHECK(out.points[i] == c.points[i]);
    }
    zmax = std::max(zmax, out.points[i].z());
  }
  CHECK(std::abs(zmax - 5.0 * median_spacing(c.points)) <= 1e-9);
}

TEST_CASE("label count and displacement signs for every kind") {
  const auto c = gen_shape({Primitive::sphere, 4000, 0.0, 6});
  for (DefectKind kind : kAllDefectKinds) {
    for (double ratio : {0.006, 0.013, 0.026}) {
      const DefectSpec spec{kind, ratio, 4.0, 21};
      const auto out = synthesize_anomaly(c, spec);
      REQUIRE(out.size() == c.size());
      std::size_t labeled = 0;
      Vec3 shear = Vec3::Zero();
      for (std::size_t i = 0; i < c.size(); ++i) {
        labeled += out.labels[i];
        const Vec3 d = out.points[i] - c.points[i];
        if (!out.labels[i]) {
          CHECK(d.norm() == 0.0);
          continue;
        }
        const double along = d.dot(c.normals[i]);
        if (kind == DefectKind::convex) CHECK(along > 0.0);
        if (kind == DefectKind::concave) CHECK(along < 0.0);
        if (kind == DefectKind::scratch) CHECK(along <= 0.0);
        if (kind == DefectKind::deformation) {
          // One shared tangential direction for the whole region.
          if (shear.isZero()) shear = d.normalized();
          CHECK(std::abs(d.normalized().dot(shear)) >= 1.0 - 1e-9);
        }
      }
      CHECK(labeled == static_cast<std::size_t>(std::llround(ratio * 4000)));
    }
  }
}

TEST_CASE("synthesis is deterministic under its seed") {
  const auto c = gen_shape({Primitive::torus, 3000, 0.2, 7});
  const DefectSpec spec{DefectKind::scar, 0.015, 4.0, 5};
  const auto a = synthesize_anomaly(c, spec), b = synthesize_anomaly(c, spec);
  CHECK(a.points == b.points);
  CHECK(a.labels == b.labels);
}

TEST_CASE("synthesis preconditions") {
  auto c = gen_shape({Primitive::sphere, 1000, 0.0, 1});
  CHECK_THROWS_AS(synthesize_anomaly(c, {DefectKind::convex, 0.005, 4.0, 1}), Error);  // 5 points
  CHECK_THROWS_AS(synthesize_anomaly(c, {DefectKind::convex, 0.2, 4.0, 1}), Error);
  c.normals.clear();
  CHECK_THROWS_AS(synthesize_anomaly(c, {DefectKind::convex, 0.02, 4.0, 1}), Error);
}

TEST_CASE("benchmark layout, counts and ratios") {
  testing::TempDir dir("bench");
  BenchmarkSpec spec;
  spec.categories = default_categories(3, 1500, 0.0);
  spec.normals = 20;
  spec.anomalies = 10;
  const auto m = gen_benchmark(spec, dir.str("b"));
  CHECK(m.rows.size() == 90);
  CHECK(fs::exists(dir.path() / "b" / "manifest.tsv"));
  CHECK_NOTHROW(m.validate(true));

  std::map<DefectKind, std::size_t> per_kind;
  for (const auto& row : m.rows) {
    if (row.role != Role::anomalous) continue;
    ++per_kind[row.defect_kind];
    const auto cloud = load_cloud(m.resolve(row.cloud_path));
    std::size_t labeled = 0;
    for (auto l : cloud.labels) labeled += l;
    const double ratio = static_cast<double>(labeled) / static_cast<double>(cloud.size());
    CHECK(ratio >= 0.005);
    CHECK(ratio <= 0.03);
    const std::string expect = row.category + "/" + to_string(row.split) + "/" + to_string(row.defect_kind) + "/" +
                               row.sample_id + ".xyz";
    CHECK(row.cloud_path == expect);
  }
  for (DefectKind k : kAllDefectKinds) CHECK(per_kind[k] == 6);

  const auto again = gen_benchmark(spec, dir.str("c"));
  CHECK(slurp(dir.path() / "b" / "manifest.tsv") == slurp(dir.path() / "c" / "manifest.tsv"));
  const auto& row = m.rows[25];
  CHECK(slurp(dir.path() / "b" / row.cloud_path) == slurp(dir.path() / "c" / row.cloud_path));
}

}  // TEST_SUITE
