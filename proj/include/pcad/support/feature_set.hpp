#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pcad {

/// Row-major float32 vectors of one dimension (a feature pool or a bank).
struct FeatureSet {
  std::size_t dim = 0;
  std::vector<float> values;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  bool empty() const { return values.empty(); }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  void append(std::span<const float> v);
  FeatureSet select(std::span<const std::uint32_t> indices) const;
};

/// Squared Euclidean distance accumulated in double with four fixed lanes.
template <typename T>
inline double sq_distance(const T* a, const T* b, std::size_t dim) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= dim; j += 4) {
    const double e0 = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    const double e1 = static_cast<double>(a[j + 1]) - static_cast<double>(b[j + 1]);
    const double e2 = static_cast<double>(a[j + 2]) - static_cast<double>(b[j + 2]);
    const double e3 = static_cast<double>(a[j + 3]) - static_cast<double>(b[j + 3]);
    s0 += e0 * e0;
    s1 += e1 * e1;
    s2 += e2 * e2;
    s3 += e3 * e3;
  }
  for (; j < dim; ++j) {
    const double e = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    s0 += e * e;
  }
  return (s0 + s1) + (s2 + s3);
}

inline double sq_distance(std::span<const float> a, std::span<const float> b) {
  return sq_distance(a.data(), b.data(), a.size());
}

/// Index of the nearest row to `query` (lowest index on ties) and its squared distance.
struct Nearest {
  std::uint32_t index;
  double d2;
};
Nearest nearest_row(const FeatureSet& set, std::span<const float> query);

/// nearest_row() for each of the `count` row-major queries. Screens with a
/// matrix product, then settles every candidate within the rounding bound
/// exactly, so the result equals the per-query scan.
std::vector<Nearest> nearest_rows(const FeatureSet& set, const float* queries, std::size_t count);

/// The k nearest rows of each query ordered by (d2, index), skipping row
/// exclude[i] for query i when `exclude` is given. Exact, like nearest_rows().
std::vector<std::vector<Nearest>> nearest_k_rows(const FeatureSet& set, const float* queries, std::size_t count,
                                                 std::size_t k, const std::uint32_t* exclude = nullptr);

}  // namespace pcad
