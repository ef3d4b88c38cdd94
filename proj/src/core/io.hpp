#pragma once

#include <filesystem>

#include "grid.hpp"

namespace spshape::io {

// Raw field dump. Header line "SPFIELD v1 dim nx [ny [nz]] h", then the
// row-major payload: ASCII (one value per line) or little-endian float64,
// flag-selected on write and auto-detected on read.
void write_spfield(const std::filesystem::path& path, const GridDomain& domain,
                   const std::vector<double>& values, bool binary);

struct LoadedField {
  int dim = 2;
  std::array<int, 3> cells{};
  double h = 0.0;
  std::vector<double> values;
};

LoadedField read_spfield(const std::filesystem::path& path);

// RFC-style CSV: header row, comma separation, '.' decimal, %.17g floats.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);
  static std::string format(double v);

private:
  FILE* f_ = nullptr;
};

// 8-bit RGB PNG
struct Image {
  int width = 0, height = 0;
  std::vector<uint8_t> rgb;  // 3 * width * height

  Image(int w, int h, uint8_t r = 255, uint8_t g = 255, uint8_t b = 255);
  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b);
  void line(double x0, double y0, double x1, double y1, uint8_t r, uint8_t g, uint8_t b);
};

void write_png(const std::filesystem::path& path, const Image& img);

// one color per phase over white void; 2D only (3D dumps skip the png)
void write_phase_heatmap(const std::filesystem::path& path, const GridDomain& domain,
                         const std::vector<IndicatorSet>& phases, int scale = 0);
void write_field_heatmap(const std::filesystem::path& path, const GridDomain& domain,
                         const std::vector<double>& values, int scale = 0);

struct Curve {
  std::vector<double> x, y;
  uint8_t r = 0, g = 0, b = 0;
  std::string label;
};

void write_curve_plot(const std::filesystem::path& path, const std::vector<Curve>& curves,
                      bool logx, bool logy, int width = 640, int height = 480);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace spshape::io
