#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcad/config.hpp"
#include "pcad/support/feature_set.hpp"

namespace pcad {

struct Provenance {
  std::string sample_id;
  std::uint32_t center = 0;
  bool operator==(const Provenance&) const = default;
};

/// An empirical support: the selected vectors and where each came from.
struct SupportSet {
  FeatureSet vectors;
  std::vector<Provenance> provenance;  // empty for banks loaded from disk
  Strategy strategy = Strategy::identity;
  std::uint64_t seed = 0;

  std::size_t size() const { return vectors.rows(); }
};

/// The normal and anomalous supports plus the configuration that built them.
struct DualSupport {
  SupportSet normal;
  SupportSet anomalous;
  RunConfig cfg;
  std::string category;
  std::size_t removed_cor = 0;

  std::size_t dim() const { return normal.vectors.dim; }
};

SupportSet make_support(const FeatureSet& pool, const std::vector<Provenance>& provenance,
                        std::span<const std::uint32_t> indices, Strategy strategy, std::uint64_t seed);

/// identity -> everything; random / greedy / greedy-proj -> k vectors.
SupportSet subsample(const FeatureSet& features, const std::vector<Provenance>& provenance, std::size_t k,
                     Strategy strategy, std::uint64_t seed, std::size_t proj_dim = 16);

/// Index-level trace of correspondence subsampling (indices into F_n / F_a).
struct CorrespondenceSelection {
  std::vector<std::uint32_t> normal;      // greedy(F_n, N)
  std::vector<std::uint32_t> candidates;  // greedy(F_a, 2N)
  std::vector<std::uint32_t> cor;         // nearest candidate of each normal vector, as a set (ascending)
  std::vector<std::uint32_t> anomalous;   // refined anomalous support
};

CorrespondenceSelection correspondence_select(const FeatureSet& normal_pool, const FeatureSet& anomalous_pool,
                                              std::size_t N, std::uint64_t seed);

DualSupport correspondence_subsample(const FeatureSet& normal_pool, const std::vector<Provenance>& normal_prov,
                                     const FeatureSet& anomalous_pool,
                                     const std::vector<Provenance>& anomalous_prov, std::size_t N,
                                     std::uint64_t seed);

/// Bank file: "PCADBANK", version u32, C1 u32, n_normal u64, n_anomalous u64,
/// float32 rows, then a u64-length-prefixed key=value metadata block.
inline constexpr std::uint32_t kBankVersion = 1;
void save_bank(const DualSupport& ds, const std::string& path);
DualSupport load_bank(const std::string& path);

}  // namespace pcad
