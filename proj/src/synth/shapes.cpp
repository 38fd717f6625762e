#include <cmath>
#include <numbers>
#include <random>

#include "pcad/error.hpp"
#include "pcad/rng.hpp"
#include "pcad/synth/synth.hpp"

namespace pcad {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// R3 sequence (generalized golden ratio for three dimensions).
constexpr double kPlastic3 = 1.2207440846057596;

struct SurfacePoint {
  Vec3 p;
  Vec3 n;
};

// Maps a unit-cube sample onto the primitive with area-uniform density.
// Returns false when the torus rejection step discards the sample.
bool map_sample(Primitive prim, double u, double v, double w, SurfacePoint& out) {
  using namespace shape_dims;
  switch (prim) {
    case Primitive::plane:
      out.p = Vec3((2 * u - 1) * kPlaneHalf, (2 * v - 1) * kPlaneHalf, 0.0);
      out.n = Vec3(0, 0, 1);
      return true;
    case Primitive::sphere: {
      const double z = 1.0 - 2.0 * u;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = kTwoPi * v;
      out.n = Vec3(r * std::cos(phi), r * std::sin(phi), z);
      out.p = kSphereRadius * out.n;
      return true;
    }
    case Primitive::cylinder: {
      const double r = kCylinderRadius, h = kCylinderHalfHeight;
      const double side = kTwoPi * r * 2 * h, cap = std::numbers::pi * r * r;
      const double c = w * (side + 2 * cap);
      if (c < side) {
        const double phi = kTwoPi * u;
        out.n = Vec3(std::cos(phi), std::sin(phi), 0.0);
        out.p = Vec3(r * out.n[0], r * out.n[1], -h + 2 * h * v);
      } else {
        const double rho = r * std::sqrt(u), phi = kTwoPi * v;
        const double sign = c < side + cap ? 1.0 : -1.0;
        out.p = Vec3(rho * std::cos(phi), rho * std::sin(phi), sign * h);
        out.n = Vec3(0, 0, sign);
      }
      return true;
    }
    case Primitive::torus: {
      const double R = kTorusMajor, r = kTorusMinor;
      const double theta = kTwoPi * u, phi = kTwoPi * v;
      const double ring = R + r * std::cos(theta);
      if (w * (R + r) > ring) return false;
      out.n = Vec3(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), std::sin(theta));
      out.p = Vec3(ring * std::cos(phi), ring * std::sin(phi), r * std::sin(theta));
      return true;
    }
    case Primitive::washer: {
      const double ri = kWasherInner, ro = kWasherOuter, t = kWasherHalfThickness;
      const double face = std::numbers::pi * (ro * ro - ri * ri);
      const double outer = kTwoPi * ro * 2 * t, inner = kTwoPi * ri * 2 * t;
      const double c = w * (2 * face + outer + inner);
      if (c < 2 * face) {
        const double rho = std::sqrt(ri * ri + u * (ro * ro - ri * ri)), phi = kTwoPi * v;
        const double sign = c < face ? 1.0 : -1.0;
        out.p = Vec3(rho * std::cos(phi), rho * std::sin(phi), sign * t);
        out.n = Vec3(0, 0, sign);
      } else {
        const bool is_outer = c < 2 * face + outer;
        const double rad = is_outer ? ro : ri;
        const double phi = kTwoPi * u;
        const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
        out.p = Vec3(rad * radial[0], rad * radial[1], -t + 2 * t * v);
        out.n = is_outer ? radial : Vec3(-radial);
      }
      return true;
    }
  }
  return false;
}

}  // namespace

std::string to_string(Primitive p) {
  switch (p) {
    case Primitive::plane: return "plane";
    case Primitive::sphere: return "sphere";
    case Primitive::cylinder: return "cylinder";
    case Primitive::torus: return "torus";
    case Primitive::washer: return "washer";
  }
  return "?";
}

Primitive parse_primitive(const std::string& t) {
  if (t == "plane") return Primitive::plane;
  if (t == "sphere") return Primitive::sphere;
  if (t == "cylinder") return Primitive::cylinder;
  if (t == "torus") return Primitive::torus;
  if (t == "washer") return Primitive::washer;
  fail_usage("unknown primitive '" + t + "' (plane, sphere, cylinder, torus, washer)");
}

void ShapeSpec::validate() const {
  if (n_points < 1) fail_usage("shape needs n_points >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail_usage("shape noise_sigma must be >= 0");
}

LabeledCloud gen_shape(const ShapeSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "shape"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double a1 = 1.0 / kPlastic3, a2 = a1 / kPlastic3, a3 = a2 / kPlastic3;
  const double o1 = unit(rng), o2 = unit(rng), o3 = unit(rng);

  LabeledCloud cloud;
  cloud.points.reserve(spec.n_points);
  cloud.normals.reserve(spec.n_points);
  if (spec.primitive == Primitive::sphere) {
    // Fibonacci lattice: the generic (z, phi) map streaks near the poles.
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::Quaterniond q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized();
    const Eigen::Matrix3d rot = q.toRotationMatrix();
    const double n = static_cast<double>(spec.n_points);
    const double golden = 2.0 / (1.0 + std::sqrt(5.0));
    for (std::size_t i = 0; i < spec.n_points; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = kTwoPi * std::fmod(o1 + static_cast<double>(i) * golden, 1.0);
      const Vec3 dir = rot * Vec3(r * std::cos(phi), r * std::sin(phi), z);
      cloud.normals.push_back(dir.normalized());
      cloud.points.push_back(shape_dims::kSphereRadius * cloud.normals.back());
    }
  }
  SurfacePoint sp;
  for (std::uint64_t i = 1; cloud.points.size() < spec.n_points; ++i) {
    const double fi = static_cast<double>(i);
    const double u = std::fmod(o1 + fi * a1, 1.0);
    const double v = std::fmod(o2 + fi * a2, 1.0);
    const double w = std::fmod(o3 + fi * a3, 1.0);
    if (!map_sample(spec.primitive, u, v, w, sp)) continue;
    cloud.points.push_back(sp.p);
    cloud.normals.push_back(sp.n.normalized());
  }
  if (spec.noise_sigma > 0.0 && cloud.size() > 1) {
    const double sigma = spec.noise_sigma * median_spacing(cloud.points);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (std::size_t i = 0; i < cloud.size(); ++i) cloud.points[i] += gauss(rng) * cloud.normals[i];
  }
  cloud.labels.assign(cloud.size(), 0);
  return cloud;
}

}  // namespace pcad
