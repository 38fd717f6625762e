#include <algorithm>
#include <sstream>

#include "pcad/binary_io.hpp"
#include "pcad/error.hpp"
#include "pcad/support/support.hpp"

namespace pcad {

namespace {
constexpr char kMagic[8] = {'P', 'C', 'A', 'D', 'B', 'A', 'N', 'K'};
}

void save_bank(const DualSupport& ds, const std::string& path) {
  const std::size_t dim = ds.dim();
  if (dim == 0) fail_data("refusing to save a bank with zero feature dimension");
  if (!ds.anomalous.vectors.empty() && ds.anomalous.vectors.dim != dim)
    fail_data("bank supports have different dimensions");
  bin::Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint<std::uint32_t>(kBankVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(dim));
  w.uint<std::uint64_t>(ds.normal.size());
  w.uint<std::uint64_t>(ds.anomalous.size());
  for (float v : ds.normal.vectors.values) w.f32(v);
  for (float v : ds.anomalous.vectors.values) w.f32(v);

  std::string meta = ds.cfg.to_text();
  meta += "category=" + ds.category + "\n";
  meta += "removed_cor=" + std::to_string(ds.removed_cor) + "\n";
  meta += "normal_strategy=" + to_string(ds.normal.strategy) + "\n";
  meta += "anomalous_strategy=" + to_string(ds.anomalous.strategy) + "\n";
  meta += "normal_seed=" + std::to_string(ds.normal.seed) + "\n";
  meta += "anomalous_seed=" + std::to_string(ds.anomalous.seed) + "\n";
  w.uint<std::uint64_t>(meta.size());
  w.bytes(meta.data(), meta.size());
  bin::write_file(path, w.data());
}

DualSupport load_bank(const std::string& path) {
  bin::Reader r(bin::read_file(path), path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) fail_data(path + ": not a bank file (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version != kBankVersion)
    fail_data(path + ": bank version " + std::to_string(version) + " is not supported (expected " +
              std::to_string(kBankVersion) + ")");
  const auto dim = r.uint<std::uint32_t>();
  const auto n_normal = r.uint<std::uint64_t>();
  const auto n_anom = r.uint<std::uint64_t>();
  if (dim == 0) fail_data(path + ": zero feature dimension");
  const std::uint64_t floats = (n_normal + n_anom) * dim;
  if (n_normal + n_anom > r.remaining() / (4ull * dim)) r.need(r.remaining() + 1);
  r.need(floats * 4);

  DualSupport ds;
  ds.normal.vectors.dim = dim;
  ds.anomalous.vectors.dim = dim;
  ds.normal.vectors.values.resize(n_normal * dim);
  ds.anomalous.vectors.values.resize(n_anom * dim);
  for (auto& v : ds.normal.vectors.values) v = r.f32();
  for (auto& v : ds.anomalous.vectors.values) v = r.f32();

  const auto meta_len = r.uint<std::uint64_t>();
  r.need(meta_len);
  std::string meta(meta_len, '\0');
  r.bytes(meta.data(), meta_len);
  if (r.remaining() != 0) fail_data(path + ": trailing bytes after bank metadata");

  std::istringstream is(meta);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_data(path + ": malformed metadata line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "category") ds.category = value;
      else if (key == "removed_cor") ds.removed_cor = std::stoull(value);
      else if (key == "normal_strategy") ds.normal.strategy = parse_strategy(value);
      else if (key == "anomalous_strategy") ds.anomalous.strategy = parse_strategy(value);
      else if (key == "normal_seed") ds.normal.seed = std::stoull(value);
      else if (key == "anomalous_seed") ds.anomalous.seed = std::stoull(value);
      else ds.cfg.set(key, value);
    } catch (const std::exception& e) {
      fail_data(path + ": bad metadata '" + line + "': " + e.what());
    }
  }
  if (ds.cfg.feature_dim() != dim)
    fail_data(path + ": bank dimension C1=" + std::to_string(dim) + " disagrees with its scales (C1=" +
              std::to_string(ds.cfg.feature_dim()) + ")");
  return ds;
}

}  // namespace pcad
