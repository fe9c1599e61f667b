#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gcact/linalg_stats.hpp"

namespace gcact {

struct Diagnostics {
  bool constant_series = false;
  bool perfect_fit = false;
  bool ill_conditioned = false;
  bool rank_deficient = false;
  bool invalid_input = false;
  std::string message;

  /// Flags that force a voxel inactive regardless of its p-value.
  bool disqualifying() const noexcept { return constant_series || rank_deficient || invalid_input; }
  bool any() const noexcept { return constant_series || perfect_fit || ill_conditioned || rank_deficient || invalid_input; }
  std::string to_string() const;
};

struct FitSummary {
  std::vector<double> coefficients;
  double rss = std::numeric_limits<double>::quiet_NaN();
  long dof_residual = 0;
  std::size_t cols = 0;
  bool condition_warning = false;

  static FitSummary of(const RegressionFit& fit);
};

/// Per-voxel outcome shared by the GLM and Granger detectors.
/// `statistic` is beta for GLM and the causality strength f for Granger.
struct DetectionResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool active = false;
  FitSummary fit_full;
  FitSummary fit_null;
  Diagnostics diagnostics;
};

}  // namespace gcact
