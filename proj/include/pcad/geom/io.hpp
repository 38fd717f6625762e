#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcad/geom/cloud.hpp"

namespace pcad {

enum class CloudFormat { xyz, xyzn, ply_ascii };

CloudFormat parse_cloud_format(const std::string& text);
/// Guesses the format from the extension (.xyz, .xyzn, .ply).
CloudFormat format_from_path(const std::string& path);

/// Loads a cloud. Labels come from "<basename>.labels" when that file exists.
LabeledCloud load_cloud(const std::string& path, CloudFormat format);
LabeledCloud load_cloud(const std::string& path);

/// Writes xyz (or xyzn when the cloud has normals and format is xyzn) with
/// round-trip precision.
void save_cloud(const LabeledCloud& cloud, const std::string& path, CloudFormat format = CloudFormat::xyz);

std::vector<std::uint8_t> load_labels(const std::string& path);
void save_labels(std::span<const std::uint8_t> labels, const std::string& path);

/// Score sidecar: one decimal per line, 17 significant digits.
void save_scores(const LabeledCloud& cloud, std::span<const double> point_scores, const std::string& path);
std::vector<double> load_scores(const std::string& path);

/// "dir/name.xyz" -> "dir/name" + ext.
std::string sidecar_path(const std::string& cloud_path, const std::string& ext);

}  // namespace pcad
