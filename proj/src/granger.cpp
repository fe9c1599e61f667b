#include "gcact/granger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "gcact/error.hpp"
#include "gcact/glm.hpp"
#include "gcact/parallel.hpp"

namespace gcact {

namespace {

constexpr double kLargestF = 1.0 - 1e-16;  // upper clamp keeping f strictly below 1

struct Window {
  std::size_t first = 0;  // 0-based index of the first modeled time point
  std::size_t rows = 0;
};

Window window_for(std::size_t n, int stim_lags, int auto_lags) {
  if (stim_lags < 0 || auto_lags < 1) throw InvalidParameter("lag counts must be positive");
  const auto first = static_cast<std::size_t>(std::max(stim_lags, auto_lags));
  const auto needed = static_cast<std::size_t>(stim_lags + auto_lags + 3);
  if (n < first || n - first < needed) {
    throw InvalidParameter("series of length " + std::to_string(n) + " is too short for p=" +
                           std::to_string(stim_lags) + ", L=" + std::to_string(auto_lags) + ": need at least " +
                           std::to_string(first + needed) + " samples");
  }
  return {first, n - first};
}

std::vector<double> lagged(std::span<const double> x, Window w, int lag) {
  std::vector<double> col(w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) col[i] = x[w.first + i - static_cast<std::size_t>(lag)];
  return col;
}

DesignMatrix trend_design(Window w) {
  DesignMatrix d(w.rows);
  d.add_column({ColumnKind::Intercept}, std::vector<double>(w.rows, 1.0));
  d.add_column({ColumnKind::LinearTrend}, centered_trend(w.rows));
  return d;
}

void add_auto_lags(DesignMatrix& d, std::span<const double> y, Window w, int auto_lags) {
  for (int k = 1; k <= auto_lags; ++k) d.add_column({ColumnKind::AutoLag, k}, lagged(y, w, k));
}

DesignMatrix arx_design(std::span<const double> y, std::span<const double> driver, Window w, int stim_lags,
                        int auto_lags) {
  DesignMatrix d = trend_design(w);
  for (int k = 1; k <= stim_lags; ++k) d.add_column({ColumnKind::StimulusLag, k}, lagged(driver, w, k));
  add_auto_lags(d, y, w, auto_lags);
  return d;
}

std::span<const double> window_of(std::span<const double> y, Window w) { return y.subspan(w.first, w.rows); }

double clamp_f(double rss_full, double rss_null) {
  if (!(rss_null > 0.0)) return 0.0;
  return std::clamp(1.0 - rss_full / rss_null, 0.0, kLargestF);
}

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> surrogate_driver(std::span<const double> driver, const GrangerConfig& cfg, std::mt19937_64& rng) {
  const std::size_t n = driver.size();
  std::vector<double> out(n);
  if (cfg.null_scheme == NullScheme::CircularShift) {
    const auto lo = static_cast<std::size_t>(cfg.effective_min_shift());
    std::uniform_int_distribution<std::size_t> pick(lo, n - lo);
    const std::size_t shift = pick(rng);
    for (std::size_t t = 0; t < n; ++t) out[t] = driver[(t + n - shift) % n];
    return out;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const auto block = static_cast<std::size_t>(cfg.block_len);
  std::size_t t = 0;
  while (t < n) {
    const std::size_t start = pick(rng);
    for (std::size_t j = 0; j < block && t < n; ++j, ++t) out[t] = driver[(start + j) % n];
  }
  return out;
}

// f for one driver given an already-fitted null model. Returns nullopt when the ARX fit fails.
std::optional<RegressionFit> try_fit_arx(std::span<const double> y, std::span<const double> driver, Window w,
                                         const GrangerConfig& cfg) {
  try {
    return least_squares(arx_design(y, driver, w, cfg.stim_lags, cfg.auto_lags), window_of(y, w));
  } catch (const RankDeficient&) {
    return std::nullopt;
  }
}

struct Observed {
  CausalityScore score;
  std::optional<RegressionFit> full;
  std::optional<RegressionFit> null;
};

Observed observe(std::span<const double> y, std::span<const double> driver, const GrangerConfig& cfg) {
  cfg.validate();
  if (y.size() != driver.size()) {
    throw InvalidParameter("series length " + std::to_string(y.size()) + " differs from driver length " +
                           std::to_string(driver.size()));
  }
  const Window w = window_for(y.size(), cfg.stim_lags, cfg.auto_lags);

  Observed obs;
  auto& s = obs.score;
  if (is_constant(y)) {
    s.degenerate = true;
    s.diagnostics.constant_series = true;
    s.diagnostics.message = "series is constant";
    return obs;
  }
  try {
    DesignMatrix null_design = trend_design(w);
    add_auto_lags(null_design, y, w, cfg.auto_lags);
    obs.null = least_squares(null_design, window_of(y, w));
    obs.full = least_squares(arx_design(y, driver, w, cfg.stim_lags, cfg.auto_lags), window_of(y, w));
  } catch (const RankDeficient& e) {
    s.degenerate = true;
    s.diagnostics.rank_deficient = true;
    s.diagnostics.message = e.what();
    if (obs.null) s.rss_null = obs.null->rss;
    obs.full.reset();
    return obs;
  }
  s.rss_full = obs.full->rss;
  s.rss_null = obs.null->rss;
  s.diagnostics.ill_conditioned = obs.full->condition_warning || obs.null->condition_warning;
  if (!(s.rss_null > 0.0)) {
    s.degenerate = true;
    s.diagnostics.perfect_fit = true;
    s.diagnostics.message = "null model fits exactly";
  }
  s.f = clamp_f(s.rss_full, s.rss_null);
  return obs;
}

}  // namespace

GrangerConfig GrangerConfig::for_tr(double tr_seconds) {
  if (!(tr_seconds > 0.0)) throw InvalidParameter("tr_seconds must be positive");
  GrangerConfig cfg;
  cfg.stim_lags = static_cast<int>(std::ceil(kDefaultHrfDurationSeconds / tr_seconds - 1e-9));
  cfg.auto_lags = 1;
  return cfg;
}

void GrangerConfig::validate() const {
  if (stim_lags < 1) throw InvalidParameter("stim_lags must be >= 1");
  if (auto_lags < 1) throw InvalidParameter("auto_lags must be >= 1");
  if (n_bootstrap < 1) throw InvalidParameter("n_bootstrap must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must lie in (0, 1]");
  if (block_len < 1) throw InvalidParameter("block_len must be >= 1");
  if (min_shift < 0) throw InvalidParameter("min_shift must be >= 0");
}

RegressionFit fit_arx(std::span<const double> y, std::span<const double> driver, int stim_lags, int auto_lags) {
  if (stim_lags < 1) throw InvalidParameter("stim_lags must be >= 1");
  if (y.size() != driver.size()) throw InvalidParameter("series and driver lengths differ");
  const Window w = window_for(y.size(), stim_lags, auto_lags);
  return least_squares(arx_design(y, driver, w, stim_lags, auto_lags), window_of(y, w));
}

RegressionFit fit_ar(std::span<const double> y, int auto_lags, int window_lags) {
  const Window w = window_for(y.size(), std::max(window_lags, 0), auto_lags);
  DesignMatrix d = trend_design(w);
  add_auto_lags(d, y, w, auto_lags);
  return least_squares(d, window_of(y, w));
}

CausalityScore causality_strength(std::span<const double> y, std::span<const double> driver,
                                  const GrangerConfig& cfg) {
  return observe(y, driver, cfg).score;
}

GrangerOutcome granger_detect(std::span<const double> y, std::span<const double> driver, const GrangerConfig& cfg,
                              std::uint64_t stream) {
  Observed obs = observe(y, driver, cfg);
  const std::size_t n = y.size();
  if (cfg.null_scheme == NullScheme::CircularShift &&
      n < 2 * static_cast<std::size_t>(cfg.effective_min_shift())) {
    throw InvalidParameter("series of length " + std::to_string(n) + " cannot be circularly shifted by at least " +
                           std::to_string(cfg.effective_min_shift()) + " samples in both directions");
  }

  GrangerOutcome out;
  CausalityScore& score = out.score;
  score = std::move(obs.score);

  const Window w = window_for(n, cfg.stim_lags, cfg.auto_lags);
  auto rng = stream_engine(cfg.rng_seed, stream);
  score.null_distribution.reserve(static_cast<std::size_t>(cfg.n_bootstrap));
  std::size_t exceed = 0;
  for (int b = 0; b < cfg.n_bootstrap; ++b) {
    const std::vector<double> surrogate = surrogate_driver(driver, cfg, rng);
    double f_null = 0.0;
    if (obs.null) {
      if (auto fit = try_fit_arx(y, surrogate, w, cfg)) f_null = clamp_f(fit->rss, obs.null->rss);
    }
    score.null_distribution.push_back(f_null);
    if (f_null >= score.f) ++exceed;
  }
  score.p_value = static_cast<double>(1 + exceed) / static_cast<double>(cfg.n_bootstrap + 1);
  // alpha = 1 accepts every voxel with a nonzero strength, even when p reaches 1.
  score.significant = !score.diagnostics.disqualifying() && !score.degenerate && score.f > 0.0 &&
                      (score.p_value < cfg.alpha || cfg.alpha >= 1.0);

  DetectionResult& det = out.detection;
  det.statistic = score.significant ? score.f : 0.0;
  det.p_value = score.p_value;
  det.active = score.significant;
  det.diagnostics = score.diagnostics;
  if (obs.full) det.fit_full = FitSummary::of(*obs.full);
  if (obs.null) det.fit_null = FitSummary::of(*obs.null);
  return out;
}

GrangerOutcome granger_detect(const BoldSeries& y, const StimulusTrain& stim, const GrangerConfig& cfg,
                              std::uint64_t stream) {
  if (y.size() != stim.size()) {
    throw InvalidParameter("series length " + std::to_string(y.size()) + " differs from stimulus length " +
                           std::to_string(stim.size()));
  }
  if (!same_tr(y.tr_seconds(), stim.tr_seconds())) throw InvalidParameter("series and stimulus TR differ");
  const std::vector<double> driver = stim.as_real();
  return granger_detect(y.values(), driver, cfg, stream);
}

std::vector<GrangerOutcome> granger_map(const VoxelGrid& grid, const StimulusTrain& stim, const GrangerConfig& cfg,
                                        std::size_t jobs) {
  cfg.validate();
  std::vector<GrangerOutcome> results(grid.voxel_count());
  parallel_for(grid.voxel_count(), jobs, [&](std::size_t i) {
    try {
      results[i] = granger_detect(grid.series(i), stim, cfg, i);
    } catch (const Error& e) {
      GrangerOutcome failed;
      failed.score.degenerate = true;
      failed.score.diagnostics.invalid_input = true;
      failed.score.diagnostics.message = e.what();
      failed.detection.diagnostics = failed.score.diagnostics;
      results[i] = std::move(failed);
    }
  });
  return results;
}

GrangerOutcome connectivity(const VoxelGrid& grid, std::size_t source, std::size_t target,
                            const GrangerConfig& cfg) {
  if (source >= grid.voxel_count() || target >= grid.voxel_count()) {
    throw InvalidParameter("connectivity voxel index outside grid");
  }
  if (source == target) throw InvalidParameter("connectivity source and target must differ");
  return granger_detect(grid.series(target).values(), grid.series(source).values(), cfg, target);
}

NestingReport glm_nesting_check(const BoldSeries& y, const StimulusTrain& stim, const HrfKernel& hrf, int stim_lags,
                                int auto_lags) {
  if (y.size() != stim.size()) throw InvalidParameter("series and stimulus lengths differ");
  if (stim_lags < 1 || auto_lags < 1) throw InvalidParameter("lag counts must be >= 1");
  if (static_cast<std::size_t>(stim_lags) < hrf.size()) {
    throw InvalidParameter("window mismatch: " + std::to_string(stim_lags) + " stimulus lags cannot carry a " +
                           std::to_string(hrf.size()) + "-tap HRF");
  }
  const auto values = y.values();
  const std::vector<double> driver = stim.as_real();
  const Window w = window_for(y.size(), stim_lags, auto_lags);

  // Granger designs, then the linear constraint: auto-lag weights 0, stimulus-lag weights h_k.
  const Eigen::MatrixXd arx = arx_design(values, driver, w, stim_lags, auto_lags).to_eigen();
  const auto cols = static_cast<Eigen::Index>(arx.cols());
  Eigen::MatrixXd tie = Eigen::MatrixXd::Zero(cols, 3);
  tie(0, 0) = 1.0;
  tie(1, 1) = 1.0;
  for (std::size_t k = 0; k < hrf.size(); ++k) tie(static_cast<Eigen::Index>(2 + k), 2) = hrf.taps()[k];
  const Eigen::MatrixXd tied = arx * tie;

  auto tied_column = [&tied](Eigen::Index c) {
    return std::vector<double>(tied.col(c).data(), tied.col(c).data() + tied.rows());
  };
  DesignMatrix constrained_null(w.rows);
  constrained_null.add_column({ColumnKind::Intercept}, tied_column(0));
  constrained_null.add_column({ColumnKind::LinearTrend}, tied_column(1));
  DesignMatrix constrained_full = constrained_null;
  constrained_full.add_column({ColumnKind::ConvolvedRegressor}, tied_column(2));

  // GLM models evaluated on the same rows.
  const BoldSeries r = convolve_stimulus(stim, hrf);
  DesignMatrix glm_null = trend_design(w);
  DesignMatrix glm_full = trend_design(w);
  glm_full.add_column({ColumnKind::ConvolvedRegressor}, window_of(r.values(), w));

  const auto yw = window_of(values, w);
  NestingReport report;
  report.window_rows = w.rows;
  report.rss_glm_full = least_squares(glm_full, yw).rss;
  report.rss_constrained_full = least_squares(constrained_full, yw).rss;
  report.rss_glm_null = least_squares(glm_null, yw).rss;
  report.rss_constrained_null = least_squares(constrained_null, yw).rss;

  double mean = 0.0;
  for (double v : yw) mean += v;
  mean /= static_cast<double>(yw.size());
  double tss = 0.0;
  for (double v : yw) tss += (v - mean) * (v - mean);
  const double floor = tss * std::numeric_limits<double>::epsilon();

  auto rel = [floor](double a, double b) { return std::abs(a - b) / std::max({a, b, floor, 1e-300}); };
  report.max_relative_difference = std::max(rel(report.rss_glm_full, report.rss_constrained_full),
                                            rel(report.rss_glm_null, report.rss_constrained_null));
  report.passed = report.max_relative_difference <= kNestingTolerance;
  return report;
}

}  // namespace gcact
