#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gcact/core_model.hpp"

namespace gcact {

/// Block design timing in seconds: initial rest, then `repetitions` × (task, rest), per run.
struct Paradigm {
  double initial_rest_s = 30.0;
  double task_s = 12.0;
  double rest_s = 30.0;
  int repetitions = 5;
  int runs = 2;
};

struct NoiseModel {
  double white_sd = 1.0;
  double ar1_coeff = 0.4;

  /// Stationary standard deviation of the AR(1) process.
  double marginal_sd() const;
};

struct Trend {
  double offset = 100.0;
  double slope = 0.01;
};

struct PhantomSpec {
  GridDims dims{8, 8, 1};
  double tr_seconds = 2.0;
  Paradigm paradigm;
  std::size_t n_volumes_per_run = 181;
  std::vector<bool> active_mask;  ///< one flag per voxel; empty means none active
  std::vector<double> beta_true;  ///< one amplitude per voxel, used where active
  NoiseModel noise;
  Trend trend;
  double hrf_duration_seconds = kDefaultHrfDurationSeconds;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Samples per paradigm phase after rounding each duration down to whole TRs.
struct ParadigmLayout {
  std::size_t initial_rest = 0;
  std::size_t task = 0;
  std::size_t rest = 0;
  std::size_t paradigm_samples = 0;  ///< per run, before padding
  std::size_t padding = 0;           ///< trailing rest samples added to reach n_volumes_per_run
  double remainder_seconds = 0.0;    ///< per-run time lost to rounding
};

ParadigmLayout paradigm_layout(const PhantomSpec& spec);

/// Binary train of runs × n_volumes_per_run samples; each run is padded with rest.
StimulusTrain build_stimulus(const PhantomSpec& spec);

struct PhantomData {
  VoxelGrid grid;
  std::vector<bool> truth;
  StimulusTrain stim;
};

/// y_t = offset + slope·t + beta·r_t·[active] + e_t with AR(1) noise e_t, t = 1..n.
/// Each voxel draws from its own stream derived from (rng_seed, voxel index).
PhantomData generate(const PhantomSpec& spec);

/// beta giving contrast-to-noise beta·sd(r) / sd(e) = cnr for this spec's regressor and noise.
double beta_for_cnr(const PhantomSpec& spec, double cnr);

/// Marks `n_active` voxels nearest the grid center active, all at contrast `cnr`.
void place_active_block(PhantomSpec& spec, std::size_t n_active, double cnr);

/// Default paradigm and noise with `n_active` voxels in a compact block at the grid center, all at contrast `cnr`.
PhantomSpec standard_phantom(GridDims dims, std::size_t n_active, double cnr, std::uint64_t seed);

}  // namespace gcact
