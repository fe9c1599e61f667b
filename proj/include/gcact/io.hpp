#pragma once

#include <filesystem>
#include <ios>
#include <locale>
#include <string>
#include <string_view>
#include <vector>

#include "gcact/core_model.hpp"
#include "gcact/detection.hpp"

namespace gcact::io {

/// Imbues the classic "C" locale on a stream for the guard's lifetime.
class ClassicLocale {
 public:
  explicit ClassicLocale(std::ios_base& stream) : stream_(stream), saved_(stream.imbue(std::locale::classic())) {}
  ~ClassicLocale() { stream_.imbue(saved_); }
  ClassicLocale(const ClassicLocale&) = delete;
  ClassicLocale& operator=(const ClassicLocale&) = delete;

 private:
  std::ios_base& stream_;
  std::locale saved_;
};

// BVOL1 volume layout:
//
//   BVOL1\n
//   dims <nx> <ny> <nz>\n
//   timepoints <T>\n
//   tr <seconds>\n
//   endian little\n
//   data\n
//   <nx·ny·nz·T little-endian float32, voxel-major then time, voxels row-major>
//
// Values are stored as float32, so a write/read round trip rounds to single precision.

void write_volume(std::ostream& out, const VoxelGrid& grid);
VoxelGrid read_volume(std::istream& in);
void write_volume(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid read_volume(const std::filesystem::path& path);

/// Grid with every sample rounded to float32, i.e. what a BVOL round trip yields.
VoxelGrid quantize_to_float(const VoxelGrid& grid);

/// One "0"/"1" per line, preceded by an optional "# tr=<seconds>" header.
void write_stimulus(std::ostream& out, const StimulusTrain& stim);
/// `fallback_tr` is used when the file carries no tr header; <= 0 makes the header mandatory.
StimulusTrain read_stimulus(std::istream& in, double fallback_tr = 0.0);
void write_stimulus(const std::filesystem::path& path, const StimulusTrain& stim);
StimulusTrain read_stimulus(const std::filesystem::path& path, double fallback_tr = 0.0);

struct MapRow {
  VoxelCoord coord;
  double statistic = 0.0;
  double p_value = 1.0;
  bool active = false;
};

inline constexpr std::string_view kMapCsvHeader = "x,y,z,statistic,p_value,active";

void write_map_csv(std::ostream& out, const GridDims& dims, const std::vector<DetectionResult>& results);
std::vector<MapRow> read_map_csv(std::istream& in);
std::vector<MapRow> read_map_csv(const std::filesystem::path& path);

/// 8-bit binary PGM of one axial slice; |statistic| scaled so the map maximum is 255.
void write_pgm_slice(std::ostream& out, const GridDims& dims, const std::vector<double>& magnitudes, std::size_t z,
                     double max_magnitude);
/// Writes <prefix>_z<k>.pgm for every slice k and returns the paths.
std::vector<std::filesystem::path> write_pgm_slices(const std::filesystem::path& prefix, const GridDims& dims,
                                                    const std::vector<DetectionResult>& results);

void write_truth_csv(std::ostream& out, const GridDims& dims, const std::vector<bool>& truth);

/// Shortest round-trip decimal form, independent of the C++ locale.
std::string format_number(double v);
double parse_number(std::string_view text);

}  // namespace gcact::io
