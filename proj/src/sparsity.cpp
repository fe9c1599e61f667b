#include "gcact/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcact/error.hpp"

namespace gcact {

ActivationVector::ActivationVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidParameter("activation vector must be nonempty");
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidParameter("activation magnitudes must be finite and >= 0");
  }
}

double gini_index(const ActivationVector& v) {
  std::vector<double> sorted(v.values().begin(), v.values().end());
  std::sort(sorted.begin(), sorted.end());
  double l1 = 0.0;
  for (double x : sorted) l1 += x;
  if (!(l1 > 0.0)) throw UndefinedSparsity("Gini index is undefined for an all-zero vector");

  const auto n = static_cast<double>(sorted.size());
  double acc = 0.0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    acc += (sorted[k - 1] / l1) * ((n - static_cast<double>(k) + 0.5) / n);
  }
  return 1.0 - 2.0 * acc;
}

std::vector<double> map_magnitudes(std::span<const DetectionResult> results, MagnitudeMode mode) {
  std::vector<double> out;
  out.reserve(results.size());
  for (const auto& r : results) {
    switch (mode) {
      case MagnitudeMode::Statistic:
        out.push_back(std::abs(r.statistic));
        break;
      case MagnitudeMode::AllVoxels:
        out.push_back(r.active ? std::abs(r.statistic) : 0.0);
        break;
      case MagnitudeMode::ActiveOnly:
        if (r.active) out.push_back(std::abs(r.statistic));
        break;
    }
  }
  return out;
}

double map_gini(std::span<const DetectionResult> results, MagnitudeMode mode) {
  if (results.empty()) throw InvalidParameter("activation map is empty");
  std::vector<double> magnitudes = map_magnitudes(results, mode);
  const auto active = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.active; });
  const auto nonzero = std::count_if(magnitudes.begin(), magnitudes.end(), [](double v) { return v != 0.0; });
  if (nonzero == 0) {
    throw UndefinedSparsity("Gini index undefined: all " + std::to_string(magnitudes.size()) +
                            " magnitudes are zero (" + std::to_string(results.size()) + " voxels, " +
                            std::to_string(active) + " active)");
  }
  return gini_index(ActivationVector(std::move(magnitudes)));
}

}  // namespace gcact
