#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "pcad/error.hpp"
#include "pcad/geom/io.hpp"
#include "pcad/rng.hpp"
#include "pcad/synth/synth.hpp"

namespace fs = std::filesystem;

namespace pcad {

std::vector<BenchmarkCategory> default_categories(std::size_t count, std::size_t n_points, double noise_sigma) {
  static constexpr Primitive cycle[] = {Primitive::sphere, Primitive::cylinder, Primitive::torus,
                                        Primitive::washer, Primitive::plane};
  std::vector<BenchmarkCategory> cats;
  for (std::size_t i = 0; i < count; ++i) {
    const Primitive p = cycle[i % std::size(cycle)];
    char name[32];
    std::snprintf(name, sizeof name, "c%02zu-%s", i, to_string(p).c_str());
    cats.push_back({name, ShapeSpec{p, n_points, noise_sigma, 0}});
  }
  return cats;
}

namespace {

struct Job {
  ManifestRow row;
  ShapeSpec shape;
  bool anomalous = false;
  DefectSpec defect;
};

std::string pad3(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

}  // namespace

DatasetManifest gen_benchmark(const BenchmarkSpec& spec, const std::string& out_dir) {
  if (spec.categories.empty()) fail_usage("benchmark needs at least one category");
  if (spec.train_normals > spec.normals) fail_usage("train_normals exceeds normals");
  if (spec.anomalies > 0 && spec.kinds.empty()) fail_usage("benchmark needs defect kinds for anomalies");
  if (!(spec.ratio_min > 0.0 && spec.ratio_min <= spec.ratio_max && spec.ratio_max <= 0.05))
    fail_usage("benchmark ratios must satisfy 0 < min <= max <= 0.05");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) fail_data("cannot create output directory '" + out_dir + "'");

  std::vector<Job> jobs;
  for (const auto& cat : spec.categories) {
    cat.shape.validate();
    if (cat.shape.n_points < 1000) fail_usage("benchmark shapes need n_points >= 1000");
    for (std::size_t i = 0; i < spec.normals; ++i) {
      Job j;
      j.row.sample_id = cat.name + "-normal-" + pad3(i);
      j.row.category = cat.name;
      j.row.split = i < spec.train_normals ? Split::train : Split::test;
      j.row.role = Role::normal;
      j.shape = cat.shape;
      jobs.push_back(std::move(j));
    }
    for (std::size_t i = 0; i < spec.anomalies; ++i) {
      Job j;
      const DefectKind kind = spec.kinds[i % spec.kinds.size()];
      j.row.sample_id = cat.name + "-" + to_string(kind) + "-" + pad3(i / spec.kinds.size());
      j.row.category = cat.name;
      j.row.split = Split::test;
      j.row.role = Role::anomalous;
      j.row.defect_kind = kind;
      j.shape = cat.shape;
      j.anomalous = true;
      Rng rng(derive_seed(spec.seed, "ratio:" + j.row.sample_id));
      std::uniform_real_distribution<double> ratio(spec.ratio_min, spec.ratio_max);
      j.defect = DefectSpec{kind, ratio(rng), spec.magnitude, derive_seed(spec.seed, "defect:" + j.row.sample_id)};
      j.defect.validate();
      jobs.push_back(std::move(j));
    }
  }
  for (auto& j : jobs) {
    const std::string folder = j.anomalous ? to_string(j.row.defect_kind) : "normal";
    const fs::path rel = fs::path(j.row.category) / to_string(j.row.split) / folder / (j.row.sample_id + ".xyz");
    j.row.cloud_path = rel.generic_string();
    if (j.anomalous || j.row.split == Split::test) j.row.label_path = sidecar_path(j.row.cloud_path, ".labels");
    j.shape.seed = derive_seed(spec.seed, "shape:" + j.row.sample_id);
  }

  // Each sample depends only on (seed, sample id), so the loop order is free.
  std::vector<std::string> errors(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      const Job& j = jobs[i];
      LabeledCloud cloud = gen_shape(j.shape);
      cloud.sample_id = j.row.sample_id;
      if (j.anomalous) cloud = synthesize_anomaly(cloud, j.defect);
      const fs::path path = fs::path(out_dir) / j.row.cloud_path;
      fs::create_directories(path.parent_path());
      save_cloud(cloud, path.string());
      if (!j.row.label_path.empty()) save_labels(cloud.labels, (fs::path(out_dir) / j.row.label_path).string());
    } catch (const std::exception& e) {
      errors[i] = jobs[i].row.sample_id + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) fail_data("benchmark generation failed for " + e);

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (auto& j : jobs) manifest.rows.push_back(j.row);
  save_manifest(manifest, (fs::path(out_dir) / "manifest.tsv").string());
  return manifest;
}

BenchmarkStats benchmark_stats(const DatasetManifest& manifest) {
  BenchmarkStats st;
  st.min_ratio = 1.0;
  double sum = 0.0;
  for (const auto& row : manifest.rows) {
    ++st.samples;
    if (row.role != Role::anomalous || row.label_path.empty()) continue;
    const auto labels = load_labels(manifest.resolve(row.label_path));
    std::size_t pos = 0;
    for (auto l : labels) pos += l;
    const double ratio = labels.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(labels.size());
    ++st.anomalous;
    sum += ratio;
    st.min_ratio = std::min(st.min_ratio, ratio);
    st.max_ratio = std::max(st.max_ratio, ratio);
  }
  if (st.anomalous == 0) st.min_ratio = 0.0;
  else st.mean_ratio = sum / static_cast<double>(st.anomalous);
  return st;
}

}  // namespace pcad
