#pragma once

#include <cstdint>
#include <span>

#include "pcad/support/feature_set.hpp"

namespace pcad {

/// Mann-Whitney AUROC with midranks. Throws Error(data) when only one class
/// is present.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Step-interpolated average precision over descending thresholds; tied
/// scores form one block. Throws Error(data) without positives.
double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Mean silhouette with Euclidean distance. Singleton groups contribute 0,
/// as do points with a = b = 0. Throws Error(usage) for fewer than two groups.
double silhouette(const FeatureSet& features, std::span<const int> groups);

}  // namespace pcad
