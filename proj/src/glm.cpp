#include "gcact/glm.hpp"

#include <algorithm>
#include <string>

#include "gcact/error.hpp"
#include "gcact/parallel.hpp"

namespace gcact {

GlmConfig GlmConfig::for_tr(double tr_seconds, double hrf_duration_seconds) {
  GlmConfig cfg;
  cfg.hrf = canonical_hrf(tr_seconds, hrf_duration_seconds);
  return cfg;
}

void GlmConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("GLM alpha must lie in (0, 1)");
}

std::vector<double> centered_trend(std::size_t rows) {
  std::vector<double> t(rows);
  const double mid = (static_cast<double>(rows) + 1.0) / 2.0;
  for (std::size_t i = 0; i < rows; ++i) t[i] = static_cast<double>(i + 1) - mid;
  return t;
}

bool is_constant(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
}

DetectionResult glm_detect(const BoldSeries& y, const StimulusTrain& stim, const GlmConfig& cfg) {
  cfg.validate();
  if (y.size() != stim.size()) {
    throw InvalidParameter("series length " + std::to_string(y.size()) + " differs from stimulus length " +
                           std::to_string(stim.size()));
  }
  if (!same_tr(y.tr_seconds(), stim.tr_seconds())) throw InvalidParameter("series and stimulus TR differ");
  if (y.size() <= 3 + cfg.hrf.size()) {
    throw InvalidParameter("series too short for GLM: need more than " + std::to_string(3 + cfg.hrf.size()) +
                           " samples");
  }

  DetectionResult result;
  const auto values = y.values();
  if (is_constant(values)) {
    result.diagnostics.constant_series = true;
    result.diagnostics.message = "series is constant";
    return result;
  }

  const std::size_t n = y.size();
  const BoldSeries r = convolve_stimulus(stim, cfg.hrf);
  const std::vector<double> ones(n, 1.0);
  const std::vector<double> trend = centered_trend(n);

  DesignMatrix null_design(n);
  null_design.add_column({ColumnKind::Intercept}, ones);
  if (cfg.include_trend) null_design.add_column({ColumnKind::LinearTrend}, trend);
  DesignMatrix full_design = null_design;
  full_design.add_column({ColumnKind::ConvolvedRegressor}, r.values());

  try {
    const RegressionFit null_fit = least_squares(null_design, values);
    result.fit_null = FitSummary::of(null_fit);
    const RegressionFit full_fit = least_squares(full_design, values);
    result.fit_full = FitSummary::of(full_fit);
    result.diagnostics.ill_conditioned = full_fit.condition_warning || null_fit.condition_warning;

    const FTestResult test = f_test_nested(full_fit, null_fit, n);
    result.statistic = full_fit.coefficient({ColumnKind::ConvolvedRegressor});
    result.p_value = test.p_value;
    result.diagnostics.perfect_fit = test.perfect_fit;
  } catch (const RankDeficient& e) {
    result.diagnostics.rank_deficient = true;
    result.diagnostics.message = e.what();
    return result;
  }
  result.active = result.p_value < cfg.alpha && !result.diagnostics.disqualifying();
  return result;
}

std::vector<DetectionResult> glm_map(const VoxelGrid& grid, const StimulusTrain& stim, const GlmConfig& cfg,
                                     std::size_t jobs) {
  cfg.validate();
  std::vector<DetectionResult> results(grid.voxel_count());
  parallel_for(grid.voxel_count(), jobs, [&](std::size_t i) {
    try {
      results[i] = glm_detect(grid.series(i), stim, cfg);
    } catch (const Error& e) {
      DetectionResult failed;
      failed.diagnostics.invalid_input = true;
      failed.diagnostics.message = e.what();
      results[i] = std::move(failed);
    }
  });
  return results;
}

}  // namespace gcact
