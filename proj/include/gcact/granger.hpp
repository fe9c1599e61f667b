#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gcact/core_model.hpp"
#include "gcact/detection.hpp"
#include "gcact/linalg_stats.hpp"

namespace gcact {

/// How surrogate drivers for the null distribution are produced.
enum class NullScheme {
  CircularShift,   ///< rotate the driver by a random offset; keeps both series' autocorrelation
  BlockBootstrap,  ///< circular block bootstrap of the driver
};

struct GrangerConfig {
  int stim_lags = 8;  ///< exogenous lags p
  int auto_lags = 1;  ///< autoregressive lags L
  int n_bootstrap = 100;
  double alpha = 0.05;
  NullScheme null_scheme = NullScheme::CircularShift;
  int block_len = 10;
  std::uint64_t rng_seed = 0;
  /// Smallest circular shift; 0 selects max(p, L) + p.
  int min_shift = 0;

  /// Defaults with p = ceil(16 s / tr) so the exogenous lags span the hemodynamic response.
  static GrangerConfig for_tr(double tr_seconds);
  void validate() const;
  int max_lag() const noexcept { return stim_lags > auto_lags ? stim_lags : auto_lags; }
  int effective_min_shift() const noexcept { return min_shift > 0 ? min_shift : max_lag() + stim_lags; }
};

struct CausalityScore {
  double f = 0.0;         ///< 1 - rss_full / rss_null, clamped to [0, 1)
  double rss_full = 0.0;  ///< ARX residual sum of squares
  double rss_null = 0.0;  ///< AR residual sum of squares
  std::vector<double> null_distribution;
  double p_value = 1.0;
  bool significant = false;
  bool degenerate = false;  ///< rss_null was zero or a fit failed
  Diagnostics diagnostics;
};

struct GrangerOutcome {
  DetectionResult detection;  ///< statistic = f when significant, else 0
  CausalityScore score;
};

/// Z_t = a + b·t + sum_{k=1..p} b_k X_{t-k} + sum_{k=1..L} c_k Z_{t-k}, rows t = max(p, L)+1..n.
RegressionFit fit_arx(std::span<const double> y, std::span<const double> driver, int stim_lags, int auto_lags);

/// Z_t = a' + b'·t + sum_{k=1..L} c'_k Z_{t-k} over the same rows as fit_arx(…, window_lags, L).
RegressionFit fit_ar(std::span<const double> y, int auto_lags, int window_lags = 0);

/// Causality strength without the significance fields.
CausalityScore causality_strength(std::span<const double> y, std::span<const double> driver, const GrangerConfig& cfg);

/// Full detection for an arbitrary real-valued driver. `stream` selects the RNG
/// stream used for the surrogates, derived together with cfg.rng_seed.
GrangerOutcome granger_detect(std::span<const double> y, std::span<const double> driver, const GrangerConfig& cfg,
                              std::uint64_t stream);

/// Stimulus-to-voxel detection.
GrangerOutcome granger_detect(const BoldSeries& y, const StimulusTrain& stim, const GrangerConfig& cfg,
                              std::uint64_t stream = 0);

/// granger_detect per voxel with stream = voxel index.
std::vector<GrangerOutcome> granger_map(const VoxelGrid& grid, const StimulusTrain& stim, const GrangerConfig& cfg,
                                        std::size_t jobs = 1);

/// Voxel-to-voxel causality: the stimulus detector with the source series as driver
/// and stream = target index.
GrangerOutcome connectivity(const VoxelGrid& grid, std::size_t source, std::size_t target, const GrangerConfig& cfg);

struct NestingReport {
  double rss_glm_full = 0.0;
  double rss_constrained_full = 0.0;
  double rss_glm_null = 0.0;
  double rss_constrained_null = 0.0;
  double max_relative_difference = 0.0;
  std::size_t window_rows = 0;
  bool passed = false;
};

inline constexpr double kNestingTolerance = 1e-8;

/// Fits the Granger models with c_k = c'_k = 0 and b_k = beta·h_k and compares them
/// with the GLM fits on the same rows.
NestingReport glm_nesting_check(const BoldSeries& y, const StimulusTrain& stim, const HrfKernel& hrf, int stim_lags,
                                int auto_lags);

}  // namespace gcact
