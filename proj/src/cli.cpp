#include "gcact/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gcact/error.hpp"
#include "gcact/glm.hpp"
#include "gcact/granger.hpp"
#include "gcact/io.hpp"
#include "gcact/phantom.hpp"
#include "gcact/sparsity.hpp"

namespace gcact::cli {

namespace {

namespace fs = std::filesystem;

struct GlmFlags {
  double alpha = 0.05;
  double hrf_duration = kDefaultHrfDurationSeconds;
};

struct GcFlags {
  int stim_lags = 0;  // 0: derive from TR
  int auto_lags = 1;
  int bootstrap = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string null_scheme = "circular-shift";
  int block_len = 10;
};

struct Inputs {
  std::string volume;
  std::string stimulus;
  std::string out;
  std::size_t jobs = 0;
};

void add_glm_flags(CLI::App* cmd, GlmFlags& f) {
  cmd->add_option("--hrf-duration", f.hrf_duration, "HRF support in seconds")->capture_default_str();
}

void add_gc_flags(CLI::App* cmd, GcFlags& f) {
  cmd->add_option("--stim-lags", f.stim_lags, "exogenous lags p (default ceil(16 s / TR))");
  cmd->add_option("--auto-lags", f.auto_lags, "autoregressive lags L")->capture_default_str();
  cmd->add_option("--bootstrap", f.bootstrap, "surrogate count for the null distribution")->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--null-scheme", f.null_scheme, "circular-shift or block-bootstrap")->capture_default_str();
  cmd->add_option("--block-len", f.block_len, "block length for block-bootstrap")->capture_default_str();
}

GlmConfig glm_config(const GlmFlags& f, double tr) {
  if (!(f.hrf_duration >= tr)) throw InvalidParameter("--hrf-duration must be at least one TR");
  GlmConfig cfg = GlmConfig::for_tr(tr, f.hrf_duration);
  cfg.alpha = f.alpha;
  cfg.validate();
  return cfg;
}

GrangerConfig gc_config(const GcFlags& f, double tr) {
  GrangerConfig cfg = GrangerConfig::for_tr(tr);
  if (f.stim_lags != 0) cfg.stim_lags = f.stim_lags;
  cfg.auto_lags = f.auto_lags;
  cfg.n_bootstrap = f.bootstrap;
  cfg.alpha = f.alpha;
  cfg.rng_seed = f.seed;
  cfg.block_len = f.block_len;
  if (f.null_scheme == "circular-shift") {
    cfg.null_scheme = NullScheme::CircularShift;
  } else if (f.null_scheme == "block-bootstrap") {
    cfg.null_scheme = NullScheme::BlockBootstrap;
  } else {
    throw InvalidParameter("--null-scheme must be circular-shift or block-bootstrap");
  }
  cfg.validate();
  return cfg;
}

struct Loaded {
  VoxelGrid grid;
  StimulusTrain stim;
};

Loaded load(const Inputs& in) {
  VoxelGrid grid = io::read_volume(fs::path(in.volume));
  StimulusTrain stim = io::read_stimulus(fs::path(in.stimulus), grid.tr_seconds());
  if (stim.size() != grid.timepoints()) {
    throw InvalidParameter("stimulus has " + std::to_string(stim.size()) + " samples but volume has " +
                           std::to_string(grid.timepoints()) + " timepoints");
  }
  if (!same_tr(stim.tr_seconds(), grid.tr_seconds())) throw InvalidParameter("stimulus and volume TR differ");
  return {std::move(grid), std::move(stim)};
}

std::optional<double> try_gini(const std::vector<DetectionResult>& map) {
  try {
    return map_gini(map, MagnitudeMode::AllVoxels);
  } catch (const UndefinedSparsity&) {
    return std::nullopt;
  }
}

std::string gini_text(const std::optional<double>& g) { return g ? io::format_number(*g) : "undefined"; }

std::size_t count_active(const std::vector<DetectionResult>& map) {
  return static_cast<std::size_t>(std::count_if(map.begin(), map.end(), [](const auto& r) { return r.active; }));
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

void write_map(const std::string& prefix, const GridDims& dims, const std::vector<DetectionResult>& map) {
  {
    std::ofstream csv(with_suffix(prefix, ".csv"), std::ios::trunc);
    if (!csv) throw FormatError("cannot open " + prefix + ".csv for writing");
    io::write_map_csv(csv, dims, map);
  }
  io::write_pgm_slices(fs::path(prefix), dims, map);
}

std::vector<DetectionResult> detections(const std::vector<GrangerOutcome>& outcomes) {
  std::vector<DetectionResult> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.detection);
  return out;
}

VoxelCoord parse_coord(const std::string& text, const char* flag) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument("");
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidParameter(std::string(flag) + " expects x,y,z nonnegative integers, got '" + text + "'");
    }
  }
  if (parts.size() != 3) throw InvalidParameter(std::string(flag) + " expects x,y,z, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

int cmd_glm(const Inputs& in, const GlmFlags& flags, std::ostream& out) {
  const Loaded data = load(in);
  const GlmConfig cfg = glm_config(flags, data.grid.tr_seconds());
  const auto map = glm_map(data.grid, data.stim, cfg, in.jobs);
  write_map(in.out, data.grid.dims(), map);
  out << "glm: voxels=" << map.size() << " active=" << count_active(map) << " gini=" << gini_text(try_gini(map))
      << '\n';
  return kExitOk;
}

int cmd_gc(const Inputs& in, const GcFlags& flags, std::ostream& out) {
  const Loaded data = load(in);
  const GrangerConfig cfg = gc_config(flags, data.grid.tr_seconds());
  const auto map = detections(granger_map(data.grid, data.stim, cfg, in.jobs));
  write_map(in.out, data.grid.dims(), map);
  out << "gc: voxels=" << map.size() << " active=" << count_active(map) << " gini=" << gini_text(try_gini(map))
      << '\n';
  return kExitOk;
}

int cmd_compare(const Inputs& in, const GlmFlags& glm_flags, const GcFlags& gc_flags, std::ostream& out) {
  const Loaded data = load(in);
  const GlmConfig glm_cfg = glm_config(glm_flags, data.grid.tr_seconds());
  const GrangerConfig gc_cfg = gc_config(gc_flags, data.grid.tr_seconds());
  const auto glm = glm_map(data.grid, data.stim, glm_cfg, in.jobs);
  const auto gc = detections(granger_map(data.grid, data.stim, gc_cfg, in.jobs));

  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < glm.size(); ++i) {
    both += glm[i].active && gc[i].active;
    either += glm[i].active || gc[i].active;
  }
  std::ostringstream report;
  {
    const io::ClassicLocale classic(report);
    report << "voxels=" << glm.size() << '\n'
           << "glm_active=" << count_active(glm) << '\n'
           << "gc_active=" << count_active(gc) << '\n'
           << "overlap=" << both << '\n'
           << "jaccard=" << (either == 0 ? std::string("undefined") : io::format_number(double(both) / double(either)))
           << '\n'
           << "glm_gini=" << gini_text(try_gini(glm)) << '\n'
           << "gc_gini=" << gini_text(try_gini(gc)) << '\n';
  }

  write_map(in.out + "_glm", data.grid.dims(), glm);
  write_map(in.out + "_gc", data.grid.dims(), gc);
  {
    std::ofstream scatter(with_suffix(in.out, "_scatter.csv"), std::ios::trunc);
    if (!scatter) throw FormatError("cannot open " + in.out + "_scatter.csv for writing");
    const io::ClassicLocale classic(scatter);
    scatter << "x,y,z,glm_beta,glm_p,glm_active,gc_f,gc_p,gc_active\n";
    for (std::size_t i = 0; i < glm.size(); ++i) {
      const VoxelCoord c = data.grid.coord_of(i);
      scatter << c.x << ',' << c.y << ',' << c.z << ',' << io::format_number(glm[i].statistic) << ','
              << io::format_number(glm[i].p_value) << ',' << (glm[i].active ? 1 : 0) << ','
              << io::format_number(gc[i].statistic) << ',' << io::format_number(gc[i].p_value) << ','
              << (gc[i].active ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream file(with_suffix(in.out, "_report.txt"), std::ios::trunc);
    if (!file) throw FormatError("cannot open " + in.out + "_report.txt for writing");
    file << report.str();
  }
  out << report.str();
  return kExitOk;
}

int cmd_connectivity(const std::string& volume, const std::string& source_text, const std::string& target_text,
                     const std::string& out_path, const GcFlags& flags, std::ostream& out) {
  const VoxelGrid grid = io::read_volume(fs::path(volume));
  const GrangerConfig cfg = gc_config(flags, grid.tr_seconds());
  const VoxelCoord source = parse_coord(source_text, "--source");
  const VoxelCoord target = parse_coord(target_text, "--target");
  const GrangerOutcome result = connectivity(grid, grid.index_of(source), grid.index_of(target), cfg);
  const CausalityScore& s = result.score;

  nlohmann::ordered_json record;
  record["source"] = {source.x, source.y, source.z};
  record["target"] = {target.x, target.y, target.z};
  record["f"] = s.f;
  record["rss_full"] = s.rss_full;
  record["rss_null"] = s.rss_null;
  record["p_value"] = s.p_value;
  record["significant"] = s.significant;
  record["degenerate"] = s.degenerate;
  record["diagnostics"] = s.diagnostics.to_string();
  record["stim_lags"] = cfg.stim_lags;
  record["auto_lags"] = cfg.auto_lags;
  record["n_bootstrap"] = cfg.n_bootstrap;
  record["seed"] = cfg.rng_seed;
  record["null_distribution"] = s.null_distribution;
  const std::string text = record.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::trunc);
    if (!file) throw FormatError("cannot open " + out_path + " for writing");
    file << text;
  }
  out << text;
  return kExitOk;
}

struct PhantomFlags {
  std::string dims = "8,8,1";
  double tr = 2.0;
  std::size_t volumes = 181;
  int runs = 2;
  int repetitions = 5;
  double initial_rest = 30.0;
  double task = 12.0;
  double rest = 30.0;
  std::size_t active = 4;
  double cnr = 1.0;
  double noise_sd = 1.0;
  double ar1 = 0.4;
  double offset = 100.0;
  double slope = 0.01;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_phantom(const PhantomFlags& f, std::ostream& out) {
  const VoxelCoord d = parse_coord(f.dims, "--dims");
  PhantomSpec spec;
  spec.dims = {d.x, d.y, d.z};
  spec.tr_seconds = f.tr;
  spec.n_volumes_per_run = f.volumes;
  spec.paradigm = {f.initial_rest, f.task, f.rest, f.repetitions, f.runs};
  spec.noise = {f.noise_sd, f.ar1};
  spec.trend = {f.offset, f.slope};
  spec.rng_seed = f.seed;
  place_active_block(spec, f.active, f.cnr);

  const ParadigmLayout layout = paradigm_layout(spec);
  // Stored at single precision so the file reproduces the in-memory grid exactly.
  const PhantomData data = generate(spec);
  const VoxelGrid grid = io::quantize_to_float(data.grid);
  io::write_volume(with_suffix(f.out, ".bvol"), grid);
  io::write_stimulus(with_suffix(f.out, ".stim"), data.stim);
  {
    std::ofstream truth(with_suffix(f.out, "_truth.csv"), std::ios::trunc);
    if (!truth) throw FormatError("cannot open " + f.out + "_truth.csv for writing");
    io::write_truth_csv(truth, spec.dims, data.truth);
  }
  const double beta = f.active > 0 ? beta_for_cnr(spec, f.cnr) : 0.0;
  out << "phantom: dims=" << spec.dims.nx << 'x' << spec.dims.ny << 'x' << spec.dims.nz
      << " timepoints=" << grid.timepoints() << " active=" << f.active << " beta=" << io::format_number(beta)
      << " padding_per_run=" << layout.padding << '\n';
  return kExitOk;
}

int cmd_gini(const std::string& path, const std::string& mode_text, std::ostream& out) {
  MagnitudeMode mode = MagnitudeMode::AllVoxels;
  if (mode_text == "statistic") {
    mode = MagnitudeMode::Statistic;
  } else if (mode_text == "active-only") {
    mode = MagnitudeMode::ActiveOnly;
  } else if (mode_text != "all-voxels") {
    throw InvalidParameter("--mode must be statistic, all-voxels or active-only");
  }
  const auto rows = io::read_map_csv(fs::path(path));
  std::vector<DetectionResult> map(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    map[i].statistic = rows[i].statistic;
    map[i].p_value = rows[i].p_value;
    map[i].active = rows[i].active;
  }
  out << io::format_number(map_gini(map, mode)) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const io::ClassicLocale classic_out(out);
  CLI::App app{"Activation detection by GLM and Granger-like causality, with Gini sparsity of the maps"};
  app.name("gcact");
  app.require_subcommand(1);

  Inputs inputs;
  GlmFlags glm_flags;
  GcFlags gc_flags;
  double alpha = 0.05;

  auto add_inputs = [&](CLI::App* cmd) {
    cmd->add_option("volume", inputs.volume, "BVOL1 volume")->required();
    cmd->add_option("stimulus", inputs.stimulus, "stimulus file")->required();
    cmd->add_option("--out", inputs.out, "output path prefix")->required();
    cmd->add_option("--jobs", inputs.jobs, "worker threads (0: all cores)")->capture_default_str();
    cmd->add_option("--alpha", alpha, "significance level")->capture_default_str();
  };

  auto* glm = app.add_subcommand("glm", "GLM activation map");
  add_inputs(glm);
  add_glm_flags(glm, glm_flags);

  auto* gc = app.add_subcommand("gc", "Granger-like causality activation map");
  add_inputs(gc);
  add_gc_flags(gc, gc_flags);

  auto* compare = app.add_subcommand("compare", "run both detectors and compare their maps");
  add_inputs(compare);
  add_glm_flags(compare, glm_flags);
  add_gc_flags(compare, gc_flags);

  std::string conn_volume;
  std::string source;
  std::string target;
  std::string conn_out;
  auto* conn = app.add_subcommand("connectivity", "causality from one voxel's series to another's");
  conn->add_option("volume", conn_volume, "BVOL1 volume")->required();
  conn->add_option("--source", source, "driver voxel x,y,z")->required();
  conn->add_option("--target", target, "target voxel x,y,z")->required();
  conn->add_option("--out", conn_out, "also write the record to this file");
  conn->add_option("--alpha", alpha, "significance level")->capture_default_str();
  add_gc_flags(conn, gc_flags);

  PhantomFlags ph;
  auto* phantom = app.add_subcommand("phantom", "write a synthetic block-design phantom");
  phantom->add_option("--dims", ph.dims, "grid size nx,ny,nz")->capture_default_str();
  phantom->add_option("--tr", ph.tr, "repetition time in seconds")->capture_default_str();
  phantom->add_option("--volumes", ph.volumes, "volumes per run")->capture_default_str();
  phantom->add_option("--runs", ph.runs, "runs, concatenated")->capture_default_str();
  phantom->add_option("--repetitions", ph.repetitions, "task/rest blocks per run")->capture_default_str();
  phantom->add_option("--initial-rest", ph.initial_rest, "initial rest in seconds")->capture_default_str();
  phantom->add_option("--task", ph.task, "task block in seconds")->capture_default_str();
  phantom->add_option("--rest", ph.rest, "rest block in seconds")->capture_default_str();
  phantom->add_option("--active", ph.active, "active voxels at the grid center")->capture_default_str();
  phantom->add_option("--cnr", ph.cnr, "contrast-to-noise of active voxels")->capture_default_str();
  phantom->add_option("--noise-sd", ph.noise_sd, "innovation sd of the AR(1) noise")->capture_default_str();
  phantom->add_option("--ar1", ph.ar1, "AR(1) noise coefficient")->capture_default_str();
  phantom->add_option("--offset", ph.offset, "baseline intensity")->capture_default_str();
  phantom->add_option("--slope", ph.slope, "linear drift per sample")->capture_default_str();
  phantom->add_option("--seed", ph.seed, "RNG seed")->capture_default_str();
  phantom->add_option("--out", ph.out, "output path prefix")->required();

  std::string gini_path;
  std::string gini_mode = "all-voxels";
  auto* gini = app.add_subcommand("gini", "Gini sparsity index of a map CSV");
  gini->add_option("map", gini_path, "map CSV written by glm/gc")->required();
  gini->add_option("--mode", gini_mode, "statistic, all-voxels or active-only")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gcact: " << e.what() << '\n';
    return kExitParameter;
  }

  glm_flags.alpha = alpha;
  gc_flags.alpha = alpha;
  try {
    if (glm->parsed()) return cmd_glm(inputs, glm_flags, out);
    if (gc->parsed()) return cmd_gc(inputs, gc_flags, out);
    if (compare->parsed()) return cmd_compare(inputs, glm_flags, gc_flags, out);
    if (conn->parsed()) return cmd_connectivity(conn_volume, source, target, conn_out, gc_flags, out);
    if (phantom->parsed()) return cmd_phantom(ph, out);
    if (gini->parsed()) return cmd_gini(gini_path, gini_mode, out);
  } catch (const FormatError& e) {
    err << "gcact: format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const Error& e) {
    err << "gcact: " << e.what() << '\n';
    return kExitParameter;
  }
  return kExitParameter;
}

}  // namespace gcact::cli
