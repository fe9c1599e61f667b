#include "gcact/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gcact/error.hpp"

namespace gcact {

namespace {

std::size_t whole_samples(double seconds, double tr, double& remainder) {
  const double ratio = seconds / tr;
  const double whole = std::floor(ratio + 1e-9);
  remainder += std::max(0.0, seconds - whole * tr);
  return static_cast<std::size_t>(whole);
}

std::mt19937_64 voxel_engine(std::uint64_t seed, std::uint64_t voxel) {
  // Tag keeps phantom streams distinct from the detector's surrogate streams.
  constexpr std::uint32_t kPhantomTag = 0x70686e74;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(voxel), static_cast<std::uint32_t>(voxel >> 32), kPhantomTag};
  return std::mt19937_64(seq);
}

double population_sd(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

}  // namespace

double NoiseModel::marginal_sd() const { return white_sd / std::sqrt(1.0 - ar1_coeff * ar1_coeff); }

void PhantomSpec::validate() const {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw InvalidParameter("phantom dims must be positive");
  if (!(tr_seconds > 0.0) || !std::isfinite(tr_seconds)) throw InvalidParameter("phantom TR must be positive");
  if (paradigm.initial_rest_s < 0 || paradigm.task_s < 0 || paradigm.rest_s < 0) {
    throw InvalidParameter("paradigm durations must be >= 0");
  }
  if (paradigm.repetitions < 0) throw InvalidParameter("paradigm repetitions must be >= 0");
  if (paradigm.runs < 1) throw InvalidParameter("paradigm needs at least one run");
  if (n_volumes_per_run == 0) throw InvalidParameter("n_volumes_per_run must be positive");
  const std::size_t voxels = dims.voxel_count();
  if (!active_mask.empty() && active_mask.size() != voxels) {
    throw InvalidParameter("active_mask has " + std::to_string(active_mask.size()) + " entries for " +
                           std::to_string(voxels) + " voxels");
  }
  if (!beta_true.empty() && beta_true.size() != voxels) {
    throw InvalidParameter("beta_true has " + std::to_string(beta_true.size()) + " entries for " +
                           std::to_string(voxels) + " voxels");
  }
  if (!(noise.white_sd >= 0.0) || !std::isfinite(noise.white_sd)) throw InvalidParameter("noise sd must be >= 0");
  if (!(noise.ar1_coeff >= 0.0 && noise.ar1_coeff < 1.0)) throw InvalidParameter("ar1_coeff must lie in [0, 1)");
  if (!std::isfinite(trend.offset) || !std::isfinite(trend.slope)) throw InvalidParameter("trend must be finite");
}

ParadigmLayout paradigm_layout(const PhantomSpec& spec) {
  spec.validate();
  ParadigmLayout layout;
  const double tr = spec.tr_seconds;
  double remainder = 0.0;
  layout.initial_rest = whole_samples(spec.paradigm.initial_rest_s, tr, remainder);
  double per_block_remainder = 0.0;
  layout.task = whole_samples(spec.paradigm.task_s, tr, per_block_remainder);
  layout.rest = whole_samples(spec.paradigm.rest_s, tr, per_block_remainder);
  const auto reps = static_cast<std::size_t>(spec.paradigm.repetitions);
  layout.remainder_seconds = remainder + per_block_remainder * static_cast<double>(reps);
  layout.paradigm_samples = layout.initial_rest + reps * (layout.task + layout.rest);
  if (layout.paradigm_samples > spec.n_volumes_per_run) {
    throw InvalidParameter("paradigm needs " + std::to_string(layout.paradigm_samples) +
                           " volumes per run but only " + std::to_string(spec.n_volumes_per_run) + " are acquired");
  }
  layout.padding = spec.n_volumes_per_run - layout.paradigm_samples;
  return layout;
}

StimulusTrain build_stimulus(const PhantomSpec& spec) {
  const ParadigmLayout layout = paradigm_layout(spec);
  std::vector<std::uint8_t> run;
  run.reserve(spec.n_volumes_per_run);
  run.insert(run.end(), layout.initial_rest, 0);
  for (int r = 0; r < spec.paradigm.repetitions; ++r) {
    run.insert(run.end(), layout.task, 1);
    run.insert(run.end(), layout.rest, 0);
  }
  run.insert(run.end(), layout.padding, 0);

  std::vector<std::uint8_t> samples;
  samples.reserve(run.size() * static_cast<std::size_t>(spec.paradigm.runs));
  for (int r = 0; r < spec.paradigm.runs; ++r) samples.insert(samples.end(), run.begin(), run.end());
  return StimulusTrain(std::move(samples), spec.tr_seconds);
}

PhantomData generate(const PhantomSpec& spec) {
  StimulusTrain stim = build_stimulus(spec);
  const BoldSeries r = convolve_stimulus(stim, canonical_hrf(spec.tr_seconds, spec.hrf_duration_seconds));
  const std::size_t n = stim.size();
  const std::size_t voxels = spec.dims.voxel_count();
  const double rho = spec.noise.ar1_coeff;
  const double sd = spec.noise.white_sd;

  std::vector<bool> truth(voxels, false);
  std::vector<BoldSeries> series;
  series.reserve(voxels);
  for (std::size_t v = 0; v < voxels; ++v) {
    const bool active = !spec.active_mask.empty() && spec.active_mask[v];
    const double beta = active && !spec.beta_true.empty() ? spec.beta_true[v] : 0.0;
    truth[v] = active;

    auto rng = voxel_engine(spec.rng_seed, v);
    std::normal_distribution<double> white(0.0, 1.0);
    std::vector<double> y(n);
    double e = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double w = sd * white(rng);
      e = t == 0 ? w / std::sqrt(1.0 - rho * rho) : rho * e + w;
      y[t] = spec.trend.offset + spec.trend.slope * static_cast<double>(t + 1) + beta * r[t] + e;
    }
    series.emplace_back(std::move(y), spec.tr_seconds);
  }
  return {VoxelGrid(spec.dims, std::move(series), spec.tr_seconds), std::move(truth), std::move(stim)};
}

double beta_for_cnr(const PhantomSpec& spec, double cnr) {
  if (!(cnr >= 0.0)) throw InvalidParameter("contrast-to-noise must be >= 0");
  const StimulusTrain stim = build_stimulus(spec);
  const BoldSeries r = convolve_stimulus(stim, canonical_hrf(spec.tr_seconds, spec.hrf_duration_seconds));
  const double sd_r = population_sd(r.values());
  if (!(sd_r > 0.0)) throw InvalidParameter("stimulus regressor has zero variance; contrast is undefined");
  return cnr * spec.noise.marginal_sd() / sd_r;
}

void place_active_block(PhantomSpec& spec, std::size_t n_active, double cnr) {
  spec.validate();
  const GridDims dims = spec.dims;
  const std::size_t voxels = dims.voxel_count();
  if (n_active > voxels) throw InvalidParameter("more active voxels requested than the grid holds");
  spec.active_mask.assign(voxels, false);
  spec.beta_true.assign(voxels, 0.0);

  // Fill outward from the center voxel in order of (squared) distance, ties by index.
  const double cx = (static_cast<double>(dims.nx) - 1.0) / 2.0;
  const double cy = (static_cast<double>(dims.ny) - 1.0) / 2.0;
  const double cz = (static_cast<double>(dims.nz) - 1.0) / 2.0;
  std::vector<std::size_t> order(voxels);
  for (std::size_t i = 0; i < voxels; ++i) order[i] = i;
  auto dist = [&](std::size_t i) {
    const double x = static_cast<double>(i % dims.nx) - cx;
    const double y = static_cast<double>((i / dims.nx) % dims.ny) - cy;
    const double z = static_cast<double>(i / (dims.nx * dims.ny)) - cz;
    return x * x + y * y + z * z;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });

  const double beta = beta_for_cnr(spec, cnr);
  for (std::size_t k = 0; k < n_active; ++k) {
    spec.active_mask[order[k]] = true;
    spec.beta_true[order[k]] = beta;
  }
}

PhantomSpec standard_phantom(GridDims dims, std::size_t n_active, double cnr, std::uint64_t seed) {
  PhantomSpec spec;
  spec.dims = dims;
  spec.rng_seed = seed;
  place_active_block(spec, n_active, cnr);
  return spec;
}

}  // namespace gcact
