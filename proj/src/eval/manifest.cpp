#include "pcad/eval/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcad/error.hpp"

namespace fs = std::filesystem;

namespace pcad {

namespace {
constexpr const char* kHeader = "sample_id\tcategory\tsplit\trole\tdefect_kind\tcloud_path\tlabel_path";
}

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }
std::string to_string(Role r) { return r == Role::normal ? "normal" : "anomalous"; }

std::string DatasetManifest::resolve(const std::string& path) const {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).string();
}

std::vector<std::string> DatasetManifest::categories() const {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.category);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DatasetManifest DatasetManifest::filter_category(const std::string& category) const {
  DatasetManifest out;
  out.base_dir = base_dir;
  for (const auto& r : rows)
    if (r.category == category) out.rows.push_back(r);
  return out;
}

void DatasetManifest::validate(bool check_paths) const {
  std::vector<std::string> ids;
  for (const auto& r : rows) {
    if (r.sample_id.empty()) fail_data("manifest row with empty sample_id");
    if (r.category.empty()) fail_data("manifest row '" + r.sample_id + "' has no category");
    if (r.cloud_path.empty()) fail_data("manifest row '" + r.sample_id + "' has no cloud_path");
    if ((r.role == Role::normal) != (r.defect_kind == DefectKind::none))
      fail_data("manifest row '" + r.sample_id + "': role " + to_string(r.role) + " conflicts with defect kind " +
                to_string(r.defect_kind));
    if (r.split == Split::test && r.label_path.empty())
      fail_data("manifest row '" + r.sample_id + "': test samples need a label_path");
    if (r.role == Role::anomalous && r.label_path.empty())
      fail_data("manifest row '" + r.sample_id + "': anomalous samples need a label_path");
    if (check_paths) {
      if (!fs::exists(resolve(r.cloud_path)))
        fail_data("manifest row '" + r.sample_id + "': missing cloud file '" + resolve(r.cloud_path) + "'");
      if (!r.label_path.empty() && !fs::exists(resolve(r.label_path)))
        fail_data("manifest row '" + r.sample_id + "': missing label file '" + resolve(r.label_path) + "'");
    }
    ids.push_back(r.sample_id);
  }
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) fail_data("manifest has duplicate sample_id '" + *dup + "'");
}

void DatasetManifest::validate_openset(const std::set<DefectKind>& seen) const {
  for (const auto& r : rows) {
    if (r.role != Role::anomalous) continue;
    const bool is_seen = seen.count(r.defect_kind) > 0;
    if (r.split == Split::train && !is_seen)
      fail_data("manifest row '" + r.sample_id + "': training anomaly of unseen kind " + to_string(r.defect_kind));
    if (r.split == Split::test && is_seen)
      fail_data("manifest row '" + r.sample_id + "': test anomaly of seen kind " + to_string(r.defect_kind));
  }
}

std::string manifest_to_tsv(const DatasetManifest& m) {
  std::ostringstream os;
  os << kHeader << '\n';
  for (const auto& r : m.rows)
    os << r.sample_id << '\t' << r.category << '\t' << to_string(r.split) << '\t' << to_string(r.role) << '\t'
       << to_string(r.defect_kind) << '\t' << r.cloud_path << '\t' << r.label_path << '\n';
  return os.str();
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open '" + path + "' for writing");
  out << manifest_to_tsv(m);
  if (!out) fail_data("write failed: '" + path + "'");
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open manifest '" + path + "'");
  DatasetManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kHeader) fail_data(path + ":" + std::to_string(lineno) + ": unexpected manifest header");
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, '\t')) cols.push_back(cell);
    if (line.back() == '\t') cols.emplace_back();
    if (cols.size() != 7)
      fail_data(path + ":" + std::to_string(lineno) + ": expected 7 columns, found " + std::to_string(cols.size()));
    ManifestRow r;
    r.sample_id = cols[0];
    r.category = cols[1];
    if (cols[2] == "train") r.split = Split::train;
    else if (cols[2] == "test") r.split = Split::test;
    else fail_data(path + ":" + std::to_string(lineno) + ": split must be train or test");
    if (cols[3] == "normal") r.role = Role::normal;
    else if (cols[3] == "anomalous") r.role = Role::anomalous;
    else fail_data(path + ":" + std::to_string(lineno) + ": role must be normal or anomalous");
    try {
      r.defect_kind = parse_defect_kind(cols[4]);
    } catch (const Error& e) {
      fail_data(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    r.cloud_path = cols[5];
    r.label_path = cols[6];
    m.rows.push_back(std::move(r));
  }
  if (!header) fail_data(path + ": empty manifest");
  m.validate(true);
  return m;
}

std::set<DefectKind> parse_kind_set(const std::vector<std::string>& names) {
  std::set<DefectKind> out;
  for (const auto& n : names) {
    auto k = parse_defect_kind(n);
    if (k == DefectKind::none) fail_usage("'none' is not a defect kind");
    out.insert(k);
  }
  return out;
}

}  // namespace pcad
