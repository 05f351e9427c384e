#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvmp/error.hpp"
#include "cvmp/io.hpp"
#include "cvmp/random.hpp"

using namespace cvmp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cvmp_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("shortest double text round-trips") {
  Rng rng(601);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.normal(0.0, 5.0));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
  CHECK(format_double(NAN) == "NA");
}

TEST_CASE("csv write-read-write is byte identical") {
  const auto dir = scratch("csv");
  Rng rng(602);
  CsvMatrix m;
  m.rows = 17;
  m.cols = 5;
  for (std::size_t i = 0; i < m.rows * m.cols; ++i) m.values.push_back(rng.normal() * 1e3);
  m.values[3] = NAN;
  write_csv(dir / "a.csv", m);
  const auto r = read_csv(dir / "a.csv");
  CHECK(r.header.empty());
  CHECK(r.rows == 17u);
  CHECK(r.cols == 5u);
  CHECK(std::isnan(r.values[3]));
  write_csv(dir / "b.csv", r);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto h = make_columns({"voxel", "beta1"}, {{0, 1, 2}, {0.25, -1.5, 1e-300}});
  write_csv(dir / "h.csv", h);
  const auto hr = read_csv(dir / "h.csv");
  CHECK(hr.header == std::vector<std::string>{"voxel", "beta1"});
  CHECK(hr.column("beta1") == std::vector<double>{0.25, -1.5, 1e-300});
  write_csv(dir / "h2.csv", hr);
  CHECK(slurp(dir / "h.csv") == slurp(dir / "h2.csv"));
  CHECK_THROWS_AS(hr.column("nope"), DataError);
}

TEST_CASE("csv rejects ragged and malformed input") {
  const auto dir = scratch("bad");
  std::ofstream(dir / "ragged.csv") << "1,2,3\n4,5\n";
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), DataError);
  std::ofstream(dir / "text.csv") << "a,b\n1,x\n";
  CHECK_THROWS_AS(read_csv(dir / "text.csv"), DataError);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), DataError);
}

TEST_CASE("manifest round trip") {
  const auto dir = scratch("manifest");
  const Manifest m{{"dims", "50x50"}, {"T", "200"}, {"seed", "7"}};
  write_manifest(dir / "m.txt", m);
  const auto r = read_manifest(dir / "m.txt");
  CHECK(r == m);
  CHECK(manifest_get(r, "T") == "200");
  CHECK_THROWS_AS(manifest_get(r, "real"), DataError);
  std::ofstream(dir / "bad.txt") << "no equals sign here\n";
  CHECK_THROWS_AS(read_manifest(dir / "bad.txt"), DataError);
}

TEST_CASE("map images") {
  const auto dir = scratch("ppm");
  const GridDims d{{50, 50}};
  SUBCASE("checkerboard survives a round trip") {
    std::vector<double> v(2500);
    for (std::size_t y = 0; y < 50; ++y)
      for (std::size_t x = 0; x < 50; ++x) v[y * 50 + x] = (x + y) % 2;
    emit_map_image(dir / "c.ppm", v, d, Palette::Binary);
    const auto img = read_ppm(dir / "c.ppm");
    CHECK(img.width == 50u);
    CHECK(img.height == 50u);
    const Rgb a = img.pixels[0], b = img.pixels[1];
    CHECK_FALSE(a == b);
    for (std::size_t y = 0; y < 50; ++y)
      for (std::size_t x = 0; x < 50; ++x) CHECK(img.pixels[y * 50 + x] == ((x + y) % 2 ? b : a));
  }
  SUBCASE("all-zero map is uniform") {
    for (auto pal : {Palette::Binary, Palette::Diverging}) {
      const auto img = render_map(std::vector<double>(2500, 0.0), d, pal);
      for (const auto& p : img.pixels) CHECK(p == img.pixels[0]);
    }
  }
  SUBCASE("diverging palette is symmetric about zero") {
    const auto img = render_map(std::vector<double>{-2.0, 0.0, 2.0, 1.0}, GridDims{{4, 1}}, Palette::Diverging);
    CHECK(img.pixels[1] == Rgb{255, 255, 255});
    CHECK(img.pixels[0].r == img.pixels[2].b);
    CHECK(img.pixels[0].b == img.pixels[2].r);
  }
  SUBCASE("3d grids tile slices") {
    const auto img = render_map(std::vector<double>(4 * 3 * 2, 1.0), GridDims{{4, 3, 2}}, Palette::Binary);
    CHECK(img.width == 8u);
    CHECK(img.height == 3u);
  }
  SUBCASE("dims mismatch") {
    CHECK_THROWS_AS(render_map(std::vector<double>(10, 0.0), d, Palette::Binary), DataError);
  }
}
