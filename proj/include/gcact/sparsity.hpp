#pragma once

#include <span>
#include <vector>

#include "gcact/detection.hpp"

namespace gcact {

/// Nonnegative activation magnitudes (|beta| or f per voxel).
class ActivationVector {
 public:
  explicit ActivationVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// Gini sparsity index: sort ascending, then 1 - 2 sum_k (v_k / |v|_1)·(N - k + 1/2) / N.
/// Lies in [0, 1 - 1/N]. Throws UndefinedSparsity when |v|_1 = 0.
double gini_index(const ActivationVector& v);

enum class MagnitudeMode {
  Statistic,   ///< |statistic| for every voxel, active or not
  AllVoxels,   ///< |statistic| for active voxels, 0 for the rest
  ActiveOnly,  ///< |statistic| of active voxels only
};

/// Gini index of an activation map under the chosen magnitude mode.
double map_gini(std::span<const DetectionResult> results, MagnitudeMode mode = MagnitudeMode::AllVoxels);

std::vector<double> map_magnitudes(std::span<const DetectionResult> results, MagnitudeMode mode);

}  // namespace gcact
