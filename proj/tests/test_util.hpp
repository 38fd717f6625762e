#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pcad/config.hpp"
#include "pcad/eval/manifest.hpp"
#include "pcad/geom/cloud.hpp"
#include "pcad/support/feature_set.hpp"
#include "pcad/synth/synth.hpp"

namespace pcad::testing {

inline std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec3> p(n);
  for (auto& x : p) x = Vec3(u(rng), u(rng), u(rng));
  return p;
}

// Integer lattice coordinates produce many exact distance ties.
inline std::vector<Vec3> lattice_points(std::size_t n, std::uint64_t seed, int extent = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(-extent, extent);
  std::vector<Vec3> p(n);
  for (auto& x : p) x = Vec3(u(rng), u(rng), u(rng));
  return p;
}

inline FeatureSet random_features(std::size_t n, std::size_t dim, std::uint64_t seed, double offset = 0.0,
                                  double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, static_cast<float>(spread));
  FeatureSet f;
  f.dim = dim;
  f.values.resize(n * dim);
  for (auto& v : f.values) v = static_cast<float>(offset) + g(rng);
  return f;
}

inline Eigen::Matrix3d fixed_rotation() {
  return (Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized())).toRotationMatrix();
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pcad-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Small on-disk benchmark for pipeline tests: clean shapes, all five kinds.
inline DatasetManifest small_benchmark(const std::string& dir, std::size_t categories = 1, std::size_t normals = 8,
                                       std::size_t train_normals = 4, std::size_t anomalies = 10,
                                       std::size_t points = 1500, double noise = 0.0) {
  BenchmarkSpec spec;
  spec.categories = default_categories(categories, points, noise);
  spec.normals = normals;
  spec.train_normals = train_normals;
  spec.anomalies = anomalies;
  spec.seed = 3;
  return gen_benchmark(spec, dir);
}

/// Configuration sized for the small benchmark.
inline RunConfig small_config() {
  RunConfig cfg;
  cfg.N = 64;
  cfg.centers_G = 48;
  cfg.aggregation_m = 64;
  cfg.shots = 2;
  cfg.folds = 2;
  return cfg;
}

}  // namespace pcad::testing
