#pragma once

#include <set>
#include <string>
#include <vector>

#include "pcad/synth/defect_kind.hpp"

namespace pcad {

enum class Split { train, test };
enum class Role { normal, anomalous };

std::string to_string(Split s);
std::string to_string(Role r);

struct ManifestRow {
  std::string sample_id;
  std::string category;
  Split split = Split::train;
  Role role = Role::normal;
  DefectKind defect_kind = DefectKind::none;
  std::string cloud_path;  // relative paths resolve against DatasetManifest::base_dir
  std::string label_path;  // may be empty for normal training samples
};

/// Sample table. TSV columns: sample_id, category, split, role, defect_kind,
/// cloud_path, label_path.
struct DatasetManifest {
  std::vector<ManifestRow> rows;
  std::string base_dir;

  std::string resolve(const std::string& path) const;
  std::vector<std::string> categories() const;  // sorted, unique
  DatasetManifest filter_category(const std::string& category) const;

  /// Unique ids, role/kind consistency and (optionally) path existence.
  void validate(bool check_paths = true) const;

  /// Additionally requires train anomalies to be of `seen` kinds and test
  /// anomalies to be of unseen kinds.
  void validate_openset(const std::set<DefectKind>& seen) const;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);
std::string manifest_to_tsv(const DatasetManifest& manifest);

std::set<DefectKind> parse_kind_set(const std::vector<std::string>& names);

}  // namespace pcad
