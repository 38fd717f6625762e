#include "pcad/geom/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcad/error.hpp"

namespace fs = std::filesystem;

namespace pcad {

namespace {

// Splits on blanks and parses every token as a finite double.
bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
    if (p >= end) break;
    double v = 0.0;
    if (*p == '+') ++p;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || !std::isfinite(v)) return false;
    out.push_back(v);
    p = next;
  }
  return true;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open '" + path + "' for writing");
  return out;
}

void read_columns(std::istream& in, const std::string& path, std::size_t columns, LabeledCloud& cloud) {
  std::string line;
  std::vector<double> row;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (!parse_row(line, row))
      fail_data(path + ":" + std::to_string(lineno) + ": malformed or non-finite value");
    if (row.size() != columns)
      fail_data(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                " columns, found " + std::to_string(row.size()));
    cloud.points.emplace_back(row[0], row[1], row[2]);
    if (columns == 6) cloud.normals.emplace_back(row[3], row[4], row[5]);
  }
}

void read_ply(std::istream& in, const std::string& path, LabeledCloud& cloud) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != "ply") fail_data(path + ":1: missing 'ply' magic");
  std::size_t vertex_count = 0;
  bool in_vertex = false, ascii = false, have_vertex = false;
  std::vector<std::string> props;
  while (true) {
    if (!next()) fail_data(path + ": unexpected end of PLY header");
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") fail_data(path + ":" + std::to_string(lineno) + ": only ASCII PLY is supported");
      ascii = true;
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) {
        if (!(ls >> vertex_count)) fail_data(path + ":" + std::to_string(lineno) + ": bad vertex count");
        have_vertex = true;
      }
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type;
      if (type == "list") fail_data(path + ":" + std::to_string(lineno) + ": list property on vertex");
      ls >> name;
      props.push_back(name);
    }
  }
  if (!ascii) fail_data(path + ": PLY header has no ascii format line");
  if (!have_vertex) fail_data(path + ": PLY has no vertex element");
  auto find = [&](const char* name) -> long {
    for (std::size_t i = 0; i < props.size(); ++i)
      if (props[i] == name) return static_cast<long>(i);
    return -1;
  };
  const long ix = find("x"), iy = find("y"), iz = find("z");
  if (ix < 0 || iy < 0 || iz < 0) fail_data(path + ": PLY vertex lacks x/y/z properties");
  const long inx = find("nx"), iny = find("ny"), inz = find("nz");
  const bool normals = inx >= 0 && iny >= 0 && inz >= 0;
  std::vector<double> row;
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!next()) fail_data(path + ": expected " + std::to_string(vertex_count) + " vertices, file ends after " + std::to_string(v));
    if (!parse_row(line, row))
      fail_data(path + ":" + std::to_string(lineno) + ": malformed or non-finite value");
    if (row.size() != props.size())
      fail_data(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(props.size()) +
                " columns, found " + std::to_string(row.size()));
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    if (normals) {
      Vec3 n(row[inx], row[iny], row[inz]);
      cloud.normals.push_back(n.normalized());
    }
  }
}

}  // namespace

CloudFormat parse_cloud_format(const std::string& text) {
  if (text == "xyz") return CloudFormat::xyz;
  if (text == "xyzn") return CloudFormat::xyzn;
  if (text == "ply" || text == "ply-ascii") return CloudFormat::ply_ascii;
  fail_usage("unknown cloud format '" + text + "' (xyz, xyzn, ply-ascii)");
}

CloudFormat format_from_path(const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  if (ext == ".xyzn") return CloudFormat::xyzn;
  if (ext == ".ply") return CloudFormat::ply_ascii;
  return CloudFormat::xyz;
}

std::string sidecar_path(const std::string& cloud_path, const std::string& ext) {
  fs::path p(cloud_path);
  p.replace_extension(ext);
  return p.string();
}

LabeledCloud load_cloud(const std::string& path, CloudFormat format) {
  auto in = open_in(path);
  LabeledCloud cloud;
  cloud.sample_id = fs::path(path).stem().string();
  switch (format) {
    case CloudFormat::xyz: read_columns(in, path, 3, cloud); break;
    case CloudFormat::xyzn: read_columns(in, path, 6, cloud); break;
    case CloudFormat::ply_ascii: read_ply(in, path, cloud); break;
  }
  if (cloud.points.empty()) fail_data(path + ": no points");
  for (auto& n : cloud.normals) {
    const double len = n.norm();
    if (!(len > 0.0)) fail_data(path + ": zero-length normal");
    n /= len;
  }
  const auto labels = sidecar_path(path, ".labels");
  if (fs::exists(labels)) {
    cloud.labels = load_labels(labels);
    if (cloud.labels.size() != cloud.points.size())
      fail_data(labels + ": " + std::to_string(cloud.labels.size()) + " labels for " +
                std::to_string(cloud.points.size()) + " points");
  }
  cloud.validate();
  return cloud;
}

LabeledCloud load_cloud(const std::string& path) { return load_cloud(path, format_from_path(path)); }

void save_cloud(const LabeledCloud& cloud, const std::string& path, CloudFormat format) {
  if (format == CloudFormat::ply_ascii) fail_usage("save_cloud writes xyz/xyzn only");
  if (format == CloudFormat::xyzn && !cloud.has_normals()) fail_usage("xyzn output needs normals");
  auto out = open_out(path);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out << fmt17(p[0]) << ' ' << fmt17(p[1]) << ' ' << fmt17(p[2]);
    if (format == CloudFormat::xyzn) {
      const auto& n = cloud.normals[i];
      out << ' ' << fmt17(n[0]) << ' ' << fmt17(n[1]) << ' ' << fmt17(n[2]);
    }
    out << '\n';
  }
  if (!out) fail_data("write failed: '" + path + "'");
}

std::vector<std::uint8_t> load_labels(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::uint8_t> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto b = line.find_first_not_of(" \t");
    auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    if (tok != "0" && tok != "1") fail_data(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
    labels.push_back(tok == "1" ? 1 : 0);
  }
  return labels;
}

void save_labels(std::span<const std::uint8_t> labels, const std::string& path) {
  auto out = open_out(path);
  for (auto l : labels) out << (l ? "1\n" : "0\n");
  if (!out) fail_data("write failed: '" + path + "'");
}

void save_scores(const LabeledCloud& cloud, std::span<const double> scores, const std::string& path) {
  if (scores.size() != cloud.size())
    fail_data("save_scores: " + std::to_string(scores.size()) + " scores for " + std::to_string(cloud.size()) +
              " points");
  auto out = open_out(path);
  for (double s : scores) out << fmt17(s) << '\n';
  if (!out) fail_data("write failed: '" + path + "'");
}

std::vector<double> load_scores(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> scores;
  std::string line;
  std::vector<double> row;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (!parse_row(line, row) || row.size() != 1)
      fail_data(path + ":" + std::to_string(lineno) + ": expected one finite score");
    scores.push_back(row[0]);
  }
  return scores;
}

}  // namespace pcad
