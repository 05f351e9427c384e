#pragma once

// Text formats: comma-separated matrices, key=value manifests, and binary PPM images.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cvmp/polar.hpp"

namespace cvmp {

struct CsvMatrix {
  std::vector<std::string> header;  // empty when the file has none
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::vector<double> column(std::size_t c) const;
  std::vector<double> column(const std::string& name) const;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const CsvMatrix& m);
// Header detection: a first line containing any non-numeric field is a header. "NA" parses as NaN.
CsvMatrix read_csv(const std::filesystem::path& path);

CsvMatrix make_columns(const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns);

using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);
const std::string& manifest_get(const Manifest& m, const std::string& key);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major, top row first
};

enum class Palette { Binary, Diverging };

// 2D grids map x to columns and y to rows; 3D grids tile z-slices left to right.
Image render_map(std::span<const double> values, const GridDims& dims, Palette palette);
void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);
void emit_map_image(const std::filesystem::path& path, std::span<const double> values,
                    const GridDims& dims, Palette palette);

}  // namespace cvmp
