#include "cvmp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cvmp/error.hpp"

namespace cvmp {
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  return in;
}

bool parse_double(const std::string& field, double& out) {
  if (field == "NA" || field == "nan") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Rgb diverging(double v, double range) {
  if (!(range > 0.0) || !std::isfinite(v)) return {255, 255, 255};
  const double t = std::clamp(v / range, -1.0, 1.0);
  const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::abs(t))));
  if (t >= 0.0) return {255, fade, fade};
  return {fade, fade, 255};
}

}  // namespace

std::vector<double> CsvMatrix::column(std::size_t c) const {
  if (c >= cols) throw DataError("column index out of range");
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
  return out;
}

std::vector<double> CsvMatrix::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return column(c);
  throw DataError("missing column '" + name + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("cannot format value");
  return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const CsvMatrix& m) {
  if (m.values.size() != m.rows * m.cols) throw_shape_mismatch("csv", m.rows * m.cols, m.values.size());
  auto out = open_out(path, std::ios::out | std::ios::binary);
  std::string line;
  if (!m.header.empty()) {
    for (std::size_t c = 0; c < m.header.size(); ++c) {
      if (c) line += ',';
      line += m.header[c];
    }
    line += '\n';
    out << line;
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) line += ',';
      line += format_double(m.at(r, c));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

CsvMatrix read_csv(const fs::path& path) {
  auto in = open_in(path);
  CsvMatrix m;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i)
      numeric = parse_double(fields[i], row[i]);
    if (first && !numeric) {
      m.header = fields;
      m.cols = fields.size();
      first = false;
      continue;
    }
    if (!numeric) throw DataError("non-numeric field in '" + path.string() + "'");
    if (m.cols == 0) m.cols = row.size();
    if (row.size() != m.cols) throw_shape_mismatch(path.string() + " row width", m.cols, row.size());
    m.values.insert(m.values.end(), row.begin(), row.end());
    ++m.rows;
    first = false;
  }
  return m;
}

CsvMatrix make_columns(const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw_shape_mismatch("column names", columns.size(), names.size());
  CsvMatrix m;
  m.header = names;
  m.cols = columns.size();
  m.rows = columns.empty() ? 0 : columns.front().size();
  m.values.resize(m.rows * m.cols);
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (columns[c].size() != m.rows) throw_shape_mismatch("column " + names[c], m.rows, columns[c].size());
    for (std::size_t r = 0; r < m.rows; ++r) m.values[r * m.cols + c] = columns[c][r];
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  for (const auto& [k, v] : m) out << k << '=' << v << '\n';
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

Manifest read_manifest(const fs::path& path) {
  auto in = open_in(path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed manifest line '" + line + "'");
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

const std::string& manifest_get(const Manifest& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw DataError("manifest is missing '" + key + "'");
  return it->second;
}

Image render_map(std::span<const double> values, const GridDims& dims, Palette palette) {
  if (values.size() != dims.voxels()) throw_shape_mismatch("map", dims.voxels(), values.size());
  if (dims.rank() == 0 || dims.rank() > 3) throw DataError("maps need 1 to 3 dimensions");
  const std::size_t nx = dims.extent[0];
  const std::size_t ny = dims.rank() > 1 ? dims.extent[1] : 1;
  const std::size_t nz = dims.rank() > 2 ? dims.extent[2] : 1;
  Image img;
  img.width = nx * nz;
  img.height = ny;
  img.pixels.resize(img.width * img.height);
  double range = 0.0;
  for (double v : values)
    if (std::isfinite(v)) range = std::max(range, std::abs(v));
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x) {
        const double v = values[x + nx * (y + ny * z)];
        Rgb px;
        if (palette == Palette::Binary) {
          const std::uint8_t c = v != 0.0 && std::isfinite(v) ? 255 : 0;
          px = {c, c, c};
        } else {
          px = diverging(v, range);
        }
        img.pixels[y * img.width + z * nx + x] = px;
      }
  return img;
}

void write_ppm(const fs::path& path, const Image& img) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (const auto& p : img.pixels) {
    const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(rgb, 3);
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

Image read_ppm(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::string magic;
  std::size_t maxval = 0;
  Image img;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P6" || maxval != 255 || !in) throw DataError("unsupported PPM '" + path.string() + "'");
  in.get();  // single whitespace before the raster
  img.pixels.resize(img.width * img.height);
  for (auto& p : img.pixels) {
    char rgb[3];
    if (!in.read(rgb, 3)) throw DataError("truncated PPM '" + path.string() + "'");
    p = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
         static_cast<std::uint8_t>(rgb[2])};
  }
  return img;
}

void emit_map_image(const fs::path& path, std::span<const double> values, const GridDims& dims,
                    Palette palette) {
  write_ppm(path, render_map(values, dims, palette));
}

}  // namespace cvmp
