#include "gcact/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gcact/error.hpp"

namespace gcact::io {

namespace {

constexpr std::string_view kMagic = "BVOL1";

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_count(std::string_view text, const char* what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError(std::string("cannot parse ") + what + ": '" + std::string(text) + "'");
  return v;
}

std::string header_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string("truncated BVOL header: missing ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> keyed_line(std::istream& in, std::string_view key, std::size_t values) {
  const std::string line = header_line(in, std::string(key).c_str());
  std::istringstream fields(line);
  std::vector<std::string> tokens;
  for (std::string tok; fields >> tok;) tokens.push_back(tok);
  if (tokens.size() != values + 1 || tokens.front() != key) {
    throw FormatError("expected BVOL header line '" + std::string(key) + "' with " + std::to_string(values) +
                      " value(s), got '" + line + "'");
  }
  tokens.erase(tokens.begin());
  return tokens;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw FormatError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
  const std::string t = trim(text);
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end) throw FormatError("cannot parse number '" + t + "'");
  return v;
}

void write_volume(std::ostream& out, const VoxelGrid& grid) {
  const ClassicLocale classic(out);
  const auto& d = grid.dims();
  out << kMagic << '\n'
      << "dims " << d.nx << ' ' << d.ny << ' ' << d.nz << '\n'
      << "timepoints " << grid.timepoints() << '\n'
      << "tr " << format_number(grid.tr_seconds()) << '\n'
      << "endian little\n"
      << "data\n";
  std::vector<char> buffer(grid.timepoints() * 4);
  for (const auto& s : grid.all_series()) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(s[t])));
      std::memcpy(buffer.data() + 4 * t, &bits, 4);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw FormatError("failed writing BVOL payload");
}

VoxelGrid read_volume(std::istream& in) {
  if (header_line(in, "magic") != kMagic) throw FormatError("not a BVOL1 file (bad magic)");
  const auto dims_tok = keyed_line(in, "dims", 3);
  const GridDims dims{parse_count(dims_tok[0], "nx"), parse_count(dims_tok[1], "ny"), parse_count(dims_tok[2], "nz")};
  const std::size_t timepoints = parse_count(keyed_line(in, "timepoints", 1)[0], "timepoints");
  const double tr = parse_number(keyed_line(in, "tr", 1)[0]);
  if (keyed_line(in, "endian", 1)[0] != "little") throw FormatError("BVOL payload must be little-endian");
  if (trim(header_line(in, "data marker")) != "data") throw FormatError("expected 'data' line ending the BVOL header");
  if (dims.voxel_count() == 0 || timepoints == 0) throw FormatError("BVOL dims and timepoints must be positive");
  if (!(tr > 0.0) || !std::isfinite(tr)) throw FormatError("BVOL tr must be positive");

  const std::size_t voxels = dims.voxel_count();
  std::vector<char> buffer(timepoints * 4);
  std::vector<BoldSeries> series;
  series.reserve(voxels);
  for (std::size_t v = 0; v < voxels; ++v) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() != static_cast<std::streamsize>(buffer.size())) {
      throw FormatError("BVOL payload truncated at voxel " + std::to_string(v) + "; expected " +
                        std::to_string(voxels * timepoints * 4) + " bytes");
    }
    std::vector<double> values(timepoints);
    for (std::size_t t = 0; t < timepoints; ++t) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, buffer.data() + 4 * t, 4);
      const float f = std::bit_cast<float>(to_little(bits));
      if (!std::isfinite(f)) throw FormatError("BVOL payload has a non-finite value at voxel " + std::to_string(v));
      values[t] = f;
    }
    series.emplace_back(std::move(values), tr);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("BVOL payload longer than its header declares");
  return VoxelGrid(dims, std::move(series), tr);
}

void write_volume(const std::filesystem::path& path, const VoxelGrid& grid) {
  auto out = open_out(path, true);
  write_volume(out, grid);
}

VoxelGrid read_volume(const std::filesystem::path& path) {
  auto in = open_in(path, true);
  return read_volume(in);
}

VoxelGrid quantize_to_float(const VoxelGrid& grid) {
  std::vector<BoldSeries> series;
  series.reserve(grid.voxel_count());
  for (const auto& s : grid.all_series()) {
    std::vector<double> values(s.values().begin(), s.values().end());
    for (auto& v : values) v = static_cast<float>(v);
    series.emplace_back(std::move(values), s.tr_seconds());
  }
  return VoxelGrid(grid.dims(), std::move(series), grid.tr_seconds());
}

void write_stimulus(std::ostream& out, const StimulusTrain& stim) {
  const ClassicLocale classic(out);
  out << "# tr=" << format_number(stim.tr_seconds()) << '\n';
  for (auto s : stim.samples()) out << (s != 0 ? '1' : '0') << '\n';
}

StimulusTrain read_stimulus(std::istream& in, double fallback_tr) {
  double tr = fallback_tr;
  bool have_header = false;
  std::vector<std::uint8_t> samples;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("tr=");
      if (pos != std::string::npos && samples.empty()) {
        tr = parse_number(std::string_view(line).substr(pos + 3));
        have_header = true;
      }
      continue;
    }
    if (line == "0" || line == "1") {
      samples.push_back(line == "1" ? 1 : 0);
    } else {
      throw FormatError("stimulus line " + std::to_string(line_no) + " is '" + line + "', expected 0 or 1");
    }
  }
  if (samples.empty()) throw FormatError("stimulus file has no samples");
  if (!have_header && !(fallback_tr > 0.0)) throw FormatError("stimulus file lacks a '# tr=<seconds>' header");
  if (!(tr > 0.0) || !std::isfinite(tr)) throw FormatError("stimulus tr must be positive");
  return StimulusTrain(std::move(samples), tr);
}

void write_stimulus(const std::filesystem::path& path, const StimulusTrain& stim) {
  auto out = open_out(path, false);
  write_stimulus(out, stim);
}

StimulusTrain read_stimulus(const std::filesystem::path& path, double fallback_tr) {
  auto in = open_in(path, false);
  return read_stimulus(in, fallback_tr);
}

void write_map_csv(std::ostream& out, const GridDims& dims, const std::vector<DetectionResult>& results) {
  const ClassicLocale classic(out);
  if (results.size() != dims.voxel_count()) throw InvalidParameter("map size does not match grid dims");
  out << kMapCsvHeader << '\n';
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::size_t x = i % dims.nx;
    const std::size_t y = (i / dims.nx) % dims.ny;
    const std::size_t z = i / (dims.nx * dims.ny);
    out << x << ',' << y << ',' << z << ',' << format_number(results[i].statistic) << ','
        << format_number(results[i].p_value) << ',' << (results[i].active ? 1 : 0) << '\n';
  }
}

std::vector<MapRow> read_map_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMapCsvHeader) {
    throw FormatError("map CSV must start with header '" + std::string(kMapCsvHeader) + "'");
  }
  std::vector<MapRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 6) throw FormatError("map CSV line " + std::to_string(line_no) + " needs 6 fields");
    MapRow row;
    row.coord = {parse_count(fields[0], "x"), parse_count(fields[1], "y"), parse_count(fields[2], "z")};
    row.statistic = parse_number(fields[3]);
    row.p_value = parse_number(fields[4]);
    if (fields[5] != "0" && fields[5] != "1") {
      throw FormatError("map CSV line " + std::to_string(line_no) + ": active must be 0 or 1");
    }
    row.active = fields[5] == "1";
    rows.push_back(row);
  }
  if (rows.empty()) throw FormatError("map CSV has no rows");
  return rows;
}

std::vector<MapRow> read_map_csv(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  return read_map_csv(in);
}

void write_pgm_slice(std::ostream& out, const GridDims& dims, const std::vector<double>& magnitudes, std::size_t z,
                     double max_magnitude) {
  const ClassicLocale classic(out);
  out << "P5\n" << dims.nx << ' ' << dims.ny << "\n255\n";
  std::vector<unsigned char> pixels(dims.nx * dims.ny, 0);
  for (std::size_t y = 0; y < dims.ny; ++y) {
    for (std::size_t x = 0; x < dims.nx; ++x) {
      const double m = magnitudes[x + dims.nx * (y + dims.ny * z)];
      if (max_magnitude > 0.0 && std::isfinite(m)) {
        pixels[x + dims.nx * y] = static_cast<unsigned char>(std::lround(std::clamp(m / max_magnitude, 0.0, 1.0) * 255.0));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

std::vector<std::filesystem::path> write_pgm_slices(const std::filesystem::path& prefix, const GridDims& dims,
                                                    const std::vector<DetectionResult>& results) {
  std::vector<double> magnitudes(results.size());
  double max_magnitude = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    magnitudes[i] = std::abs(results[i].statistic);
    if (std::isfinite(magnitudes[i])) max_magnitude = std::max(max_magnitude, magnitudes[i]);
  }
  std::vector<std::filesystem::path> paths;
  for (std::size_t z = 0; z < dims.nz; ++z) {
    std::filesystem::path path = prefix;
    path += "_z" + std::to_string(z) + ".pgm";
    auto out = open_out(path, true);
    write_pgm_slice(out, dims, magnitudes, z, max_magnitude);
    paths.push_back(path);
  }
  return paths;
}

void write_truth_csv(std::ostream& out, const GridDims& dims, const std::vector<bool>& truth) {
  const ClassicLocale classic(out);
  out << "x,y,z,active\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i % dims.nx << ',' << (i / dims.nx) % dims.ny << ',' << i / (dims.nx * dims.ny) << ','
        << (truth[i] ? 1 : 0) << '\n';
  }
}

}  // namespace gcact::io
