#include "gcact/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gcact/error.hpp"

namespace gcact {

namespace {

constexpr double kHrfExponent = 8.6;
constexpr double kHrfTimeScale = 0.547;

void require_tr(double tr_seconds) {
  if (!(tr_seconds > 0.0) || !std::isfinite(tr_seconds)) {
    throw InvalidParameter("tr_seconds must be a positive finite number");
  }
}

}  // namespace

StimulusTrain::StimulusTrain(std::vector<std::uint8_t> samples, double tr_seconds)
    : samples_(std::move(samples)), tr_seconds_(tr_seconds) {
  require_tr(tr_seconds_);
  if (samples_.empty()) throw InvalidParameter("stimulus train must have at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i] > 1) {
      throw InvalidParameter("stimulus sample " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

std::vector<double> StimulusTrain::as_real() const {
  return {samples_.begin(), samples_.end()};
}

BoldSeries::BoldSeries(std::vector<double> values, double tr_seconds)
    : values_(std::move(values)), tr_seconds_(tr_seconds) {
  require_tr(tr_seconds_);
  if (values_.empty()) throw InvalidParameter("BOLD series must have at least one sample");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidParameter("BOLD series value " + std::to_string(i) + " is not finite");
    }
  }
}

HrfKernel HrfKernel::from_taps(std::vector<double> taps, HrfNormalization normalization) {
  if (taps.empty()) throw InvalidParameter("HRF kernel needs at least one tap");
  if (!std::all_of(taps.begin(), taps.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidParameter("HRF taps must be finite");
  }
  double scale = 1.0;
  switch (normalization) {
    case HrfNormalization::UnitPeak:
      scale = *std::max_element(taps.begin(), taps.end());
      break;
    case HrfNormalization::UnitSum:
      scale = std::accumulate(taps.begin(), taps.end(), 0.0);
      break;
    case HrfNormalization::Raw:
      break;
  }
  if (normalization != HrfNormalization::Raw) {
    if (!(scale > 0.0)) throw InvalidParameter("HRF taps cannot be normalized: non-positive scale");
    for (auto& v : taps) v /= scale;
  }
  return HrfKernel(std::move(taps), normalization);
}

double canonical_hrf_value(double t_seconds) {
  if (t_seconds <= 0.0) return 0.0;
  return std::exp(kHrfExponent * std::log(t_seconds) - t_seconds / kHrfTimeScale);
}

HrfKernel canonical_hrf(double tr_seconds, double duration_seconds, HrfNormalization normalization) {
  require_tr(tr_seconds);
  if (!(duration_seconds > 0.0) || !std::isfinite(duration_seconds)) {
    throw InvalidParameter("HRF duration must be a positive finite number");
  }
  // Tolerate representation error in duration / tr (e.g. 16 / 0.1).
  const auto taps_count = static_cast<std::size_t>(std::floor(duration_seconds / tr_seconds + 1e-9));
  if (taps_count < 1) throw InvalidParameter("HRF duration must be at least one TR");

  std::vector<double> taps(taps_count);
  for (std::size_t i = 0; i < taps_count; ++i) {
    taps[i] = canonical_hrf_value(static_cast<double>(i + 1) * tr_seconds);
  }
  return HrfKernel::from_taps(std::move(taps), normalization);
}

BoldSeries convolve_stimulus(const StimulusTrain& stim, const HrfKernel& hrf) {
  const auto s = stim.samples();
  const auto h = hrf.taps();
  std::vector<double> r(s.size(), 0.0);
  for (std::size_t t = 0; t < s.size(); ++t) {
    const std::size_t max_lag = std::min(h.size(), t);
    double acc = 0.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
      if (s[t - lag] != 0) acc += h[lag - 1];
    }
    r[t] = acc;
  }
  return BoldSeries(std::move(r), stim.tr_seconds());
}

VoxelGrid::VoxelGrid(GridDims dims, std::vector<BoldSeries> series, double tr_seconds)
    : dims_(dims), series_(std::move(series)), tr_seconds_(tr_seconds) {
  require_tr(tr_seconds_);
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
    throw InvalidParameter("grid dimensions must be positive");
  }
  if (series_.size() != dims_.voxel_count()) {
    throw InvalidParameter("grid holds " + std::to_string(series_.size()) + " series but dims imply " +
                           std::to_string(dims_.voxel_count()));
  }
  const std::size_t length = series_.front().size();
  for (const auto& s : series_) {
    if (s.size() != length) throw InvalidParameter("all voxel series must share one length");
    if (!same_tr(s.tr_seconds(), tr_seconds_)) {
      throw InvalidParameter("all voxel series must share the grid TR");
    }
  }
}

std::size_t VoxelGrid::index_of(VoxelCoord c) const {
  if (c.x >= dims_.nx || c.y >= dims_.ny || c.z >= dims_.nz) {
    throw InvalidParameter("voxel coordinate outside grid");
  }
  return c.x + dims_.nx * (c.y + dims_.ny * c.z);
}

VoxelCoord VoxelGrid::coord_of(std::size_t index) const {
  if (index >= voxel_count()) throw InvalidParameter("voxel index outside grid");
  return {index % dims_.nx, (index / dims_.nx) % dims_.ny, index / (dims_.nx * dims_.ny)};
}

bool same_tr(double a, double b) noexcept { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace gcact
