#pragma once

#include <cstddef>
#include <vector>

#include "gcact/core_model.hpp"
#include "gcact/detection.hpp"

namespace gcact {

struct GlmConfig {
  HrfKernel hrf = canonical_hrf(2.0);
  double alpha = 0.05;
  bool include_trend = true;

  static GlmConfig for_tr(double tr_seconds, double hrf_duration_seconds = kDefaultHrfDurationSeconds);
  void validate() const;
};

/// Fits Z(t) = a + b·t + beta·r(t) against the trend-only baseline a' + b'·t and
/// decides activation with the nested F test. The trend regressor is centered.
DetectionResult glm_detect(const BoldSeries& y, const StimulusTrain& stim, const GlmConfig& cfg);

/// glm_detect for every voxel, in grid order. Per-voxel failures become diagnostics.
std::vector<DetectionResult> glm_map(const VoxelGrid& grid, const StimulusTrain& stim, const GlmConfig& cfg,
                                     std::size_t jobs = 1);

/// Centered time index t - mean(t) over `rows` consecutive samples.
std::vector<double> centered_trend(std::size_t rows);

bool is_constant(std::span<const double> values) noexcept;

}  // namespace gcact
