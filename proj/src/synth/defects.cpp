#include <cmath>
#include <random>

#include "pcad/error.hpp"
#include "pcad/geom/spatial_index.hpp"
#include "pcad/rng.hpp"
#include "pcad/synth/synth.hpp"

namespace pcad {

std::string to_string(DefectKind kind) {
  switch (kind) {
    case DefectKind::none: return "none";
    case DefectKind::convex: return "convex";
    case DefectKind::concave: return "concave";
    case DefectKind::scratch: return "scratch";
    case DefectKind::scar: return "scar";
    case DefectKind::deformation: return "deformation";
  }
  return "?";
}

DefectKind parse_defect_kind(const std::string& t) {
  if (t == "none") return DefectKind::none;
  if (t == "convex") return DefectKind::convex;
  if (t == "concave") return DefectKind::concave;
  if (t == "scratch") return DefectKind::scratch;
  if (t == "scar") return DefectKind::scar;
  if (t == "deformation") return DefectKind::deformation;
  fail_usage("unknown defect kind '" + t + "' (convex, concave, scratch, scar, deformation)");
}

void DefectSpec::validate() const {
  if (kind == DefectKind::none) fail_usage("defect kind must not be 'none'");
  if (!(target_ratio > 0.0 && target_ratio <= 0.05))
    fail_usage("defect target_ratio must lie in (0, 0.05], got " + std::to_string(target_ratio));
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) fail_usage("defect magnitude must be > 0");
}

namespace {

Vec3 random_tangent(const Vec3& n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 r(g(rng), g(rng), g(rng));
    r -= r.dot(n) * n;
    const double len = r.norm();
    if (len > 1e-6) return r / len;
  }
}

}  // namespace

LabeledCloud synthesize_anomaly(const LabeledCloud& cloud, const DefectSpec& spec) {
  spec.validate();
  cloud.validate();
  if (!cloud.has_normals()) fail_data("anomaly synthesis needs a cloud with normals");
  const std::size_t n = cloud.size();
  const auto r = static_cast<std::size_t>(std::llround(spec.target_ratio * static_cast<double>(n)));
  if (r < kMinDefectPoints)
    fail_data("defect region of " + std::to_string(r) + " points is too small (minimum " +
              std::to_string(kMinDefectPoints) + "); raise target_ratio or the point count");

  Rng rng(spec.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t seed_idx = pick(rng);
  const Vec3 seed_p = cloud.points[seed_idx];
  const Vec3 seed_n = cloud.normals[seed_idx];

  SpatialIndex index(cloud.points);
  const auto region = index.knn(seed_p, r);
  const double spacing = median_spacing(cloud.points);
  const double amp = spec.magnitude * spacing;
  const double radius = region.back().distance;
  const double sigma = 0.5 * radius;
  auto falloff = [&](double d) { return sigma > 0.0 ? std::exp(-d * d / (2.0 * sigma * sigma)) : 1.0; };

  const Vec3 tangent = random_tangent(seed_n, rng);
  const Vec3 across = seed_n.cross(tangent).normalized();
  const double band_half = 0.1 * (2.0 * radius);  // band width = 20% of the region extent
  std::bernoulli_distribution coin(0.5);

  LabeledCloud out;
  out.points = cloud.points;
  out.sample_id = cloud.sample_id;
  out.labels.assign(n, 0);
  for (const auto& nb : region) {
    const std::size_t i = nb.index;
    out.labels[i] = 1;
    const double w = falloff(nb.distance);
    const Vec3& normal = cloud.normals[i];
    switch (spec.kind) {
      case DefectKind::convex: out.points[i] += amp * w * normal; break;
      case DefectKind::concave: out.points[i] -= amp * w * normal; break;
      case DefectKind::scratch:
        if (std::abs((cloud.points[i] - seed_p).dot(across)) <= band_half) out.points[i] -= amp * w * normal;
        break;
      case DefectKind::scar: out.points[i] += (coin(rng) ? 1.0 : -1.0) * amp * w * normal; break;
      case DefectKind::deformation: out.points[i] += amp * w * tangent; break;
      case DefectKind::none: break;
    }
  }
  return out;
}

}  // namespace pcad
