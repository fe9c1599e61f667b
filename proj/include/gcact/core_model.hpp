#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gcact {

/// Binary stimulus indicator, one sample per acquisition.
class StimulusTrain {
 public:
  StimulusTrain(std::vector<std::uint8_t> samples, double tr_seconds);

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double tr_seconds() const noexcept { return tr_seconds_; }

  /// Samples widened to doubles, for use as a regression driver.
  std::vector<double> as_real() const;

 private:
  std::vector<std::uint8_t> samples_;
  double tr_seconds_;
};

/// One voxel's time series.
class BoldSeries {
 public:
  BoldSeries(std::vector<double> values, double tr_seconds);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double tr_seconds() const noexcept { return tr_seconds_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
  double tr_seconds_;
};

enum class HrfNormalization { UnitPeak, UnitSum, Raw };

/// Finite impulse response sampled at t = tr, 2·tr, ..., p·tr.
/// taps()[i] is h(i + 1); there is no tap at t = 0.
class HrfKernel {
 public:
  static HrfKernel from_taps(std::vector<double> taps, HrfNormalization normalization);

  std::span<const double> taps() const noexcept { return taps_; }
  std::size_t size() const noexcept { return taps_.size(); }
  HrfNormalization normalization() const noexcept { return normalization_; }

 private:
  HrfKernel(std::vector<double> taps, HrfNormalization normalization)
      : taps_(std::move(taps)), normalization_(normalization) {}

  std::vector<double> taps_;
  HrfNormalization normalization_;
};

inline constexpr double kDefaultHrfDurationSeconds = 16.0;

/// Unnormalized gamma-variate response t^8.6 exp(-t / 0.547), t in seconds.
double canonical_hrf_value(double t_seconds);

/// Samples the canonical response at i·tr for i = 1..floor(duration / tr).
HrfKernel canonical_hrf(double tr_seconds, double duration_seconds = kDefaultHrfDurationSeconds,
                        HrfNormalization normalization = HrfNormalization::UnitPeak);

/// r_t = sum_{i=1..p} h(i) S_{t-i}, with S zero before the first sample.
BoldSeries convolve_stimulus(const StimulusTrain& stim, const HrfKernel& hrf);

struct GridDims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t voxel_count() const noexcept { return nx * ny * nz; }
  bool operator==(const GridDims&) const = default;
};

struct VoxelCoord {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;
  bool operator==(const VoxelCoord&) const = default;
};

/// Voxel time series in row-major order (x fastest, then y, then z).
class VoxelGrid {
 public:
  VoxelGrid(GridDims dims, std::vector<BoldSeries> series, double tr_seconds);

  const GridDims& dims() const noexcept { return dims_; }
  double tr_seconds() const noexcept { return tr_seconds_; }
  std::size_t voxel_count() const noexcept { return series_.size(); }
  std::size_t timepoints() const noexcept { return series_.front().size(); }

  const BoldSeries& series(std::size_t index) const { return series_.at(index); }
  const BoldSeries& at(VoxelCoord c) const { return series_.at(index_of(c)); }
  const std::vector<BoldSeries>& all_series() const noexcept { return series_; }

  std::size_t index_of(VoxelCoord c) const;
  VoxelCoord coord_of(std::size_t index) const;

 private:
  GridDims dims_;
  std::vector<BoldSeries> series_;
  double tr_seconds_;
};

bool same_tr(double a, double b) noexcept;

}  // namespace gcact
