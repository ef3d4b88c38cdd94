#include "io.hpp"

#include <zlib.h>

#include <cinttypes>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spshape::io {

void write_spfield(const std::filesystem::path& path, const GridDomain& domain,
                   const std::vector<double>& values, bool binary) {
  if (int64_t(values.size()) != domain.cell_count())
    throw ConfigError("write_spfield: value count does not match the domain");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("write_spfield: cannot open " + path.string());
  f << "SPFIELD v1 " << domain.dim;
  for (int a = 0; a < domain.dim; ++a) f << ' ' << domain.cells[size_t(a)];
  f << ' ' << CsvWriter::format(domain.h) << '\n';
  if (binary) {
    f.write(reinterpret_cast<const char*>(values.data()),
            std::streamsize(values.size() * sizeof(double)));
  } else {
    for (double v : values) f << CsvWriter::format(v) << '\n';
  }
}

LoadedField read_spfield(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("read_spfield: cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("read_spfield: empty file");
  std::istringstream hs(line);
  std::string magic, ver;
  LoadedField out;
  hs >> magic >> ver >> out.dim;
  if (magic != "SPFIELD" || ver != "v1" || (out.dim != 2 && out.dim != 3))
    throw ConfigError("read_spfield: bad header in " + path.string());
  out.cells = {1, 1, 1};
  for (int a = 0; a < out.dim; ++a) hs >> out.cells[size_t(a)];
  hs >> out.h;
  if (!hs || out.h <= 0.0) throw ConfigError("read_spfield: bad header in " + path.string());
  const int64_t n = int64_t(out.cells[0]) * out.cells[1] * out.cells[2];

  const auto data_start = f.tellg();
  f.seekg(0, std::ios::end);
  const auto file_end = f.tellg();
  f.seekg(data_start);
  const int64_t payload = int64_t(file_end - data_start);
  out.values.resize(size_t(n));
  if (payload == n * int64_t(sizeof(double))) {
    f.read(reinterpret_cast<char*>(out.values.data()), std::streamsize(payload));
    if (!f) throw ConfigError("read_spfield: truncated binary payload");
  } else {
    for (int64_t i = 0; i < n; ++i)
      if (!(f >> out.values[size_t(i)]))
        throw ConfigError("read_spfield: truncated ASCII payload");
  }
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header) {
  f_ = std::fopen(path.string().c_str(), "wb");
  if (!f_) throw ConfigError("csv: cannot open " + path.string());
  for (size_t i = 0; i < header.size(); ++i)
    std::fprintf(f_, "%s%s", header[i].c_str(), i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i)
    std::fprintf(f_, "%s%s", format(values[i]).c_str(), i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  for (size_t i = 0; i < values.size(); ++i)
    std::fprintf(f_, "%s%s", values[i].c_str(), i + 1 < values.size() ? "," : "\n");
}

Image::Image(int w, int h, uint8_t r, uint8_t g, uint8_t b)
    : width(w), height(h), rgb(size_t(3) * w * h) {
  for (int i = 0; i < w * h; ++i) {
    rgb[size_t(3 * i)] = r;
    rgb[size_t(3 * i + 1)] = g;
    rgb[size_t(3 * i + 2)] = b;
  }
}

void Image::set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
  if (x < 0 || x >= width || y < 0 || y >= height) return;
  const size_t o = size_t(3) * (size_t(y) * width + x);
  rgb[o] = r;
  rgb[o + 1] = g;
  rgb[o + 2] = b;
}

void Image::line(double x0, double y0, double x1, double y1, uint8_t r, uint8_t g,
                 uint8_t b) {
  const double dx = x1 - x0, dy = y1 - y0;
  const int steps = std::max(2, int(std::ceil(std::max(std::abs(dx), std::abs(dy)))) + 1);
  for (int s = 0; s <= steps; ++s) {
    const double t = double(s) / steps;
    set(int(std::lround(x0 + t * dx)), int(std::lround(y0 + t * dy)), r, g, b);
  }
}

namespace {

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(uint8_t(x >> 24));
  v.push_back(uint8_t(x >> 16));
  v.push_back(uint8_t(x >> 8));
  v.push_back(uint8_t(x));
}

void put_chunk(std::ofstream& f, const char type[4], const std::vector<uint8_t>& data) {
  std::vector<uint8_t> hdr;
  put_u32(hdr, uint32_t(data.size()));
  f.write(reinterpret_cast<const char*>(hdr.data()), 4);
  uint32_t crc = crc32(0, reinterpret_cast<const Bytef*>(type), 4);
  f.write(type, 4);
  if (!data.empty()) {
    crc = crc32(crc, data.data(), uInt(data.size()));
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
  }
  std::vector<uint8_t> tail;
  put_u32(tail, crc);
  f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("png: cannot open " + path.string());
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  f.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr;
  put_u32(ihdr, uint32_t(img.width));
  put_u32(ihdr, uint32_t(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(f, "IHDR", ihdr);

  std::vector<uint8_t> raw;
  raw.reserve(size_t(img.height) * (size_t(img.width) * 3 + 1));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    const uint8_t* rowp = img.rgb.data() + size_t(3) * y * img.width;
    raw.insert(raw.end(), rowp, rowp + size_t(3) * img.width);
  }
  uLongf zlen = compressBound(uLong(raw.size()));
  std::vector<uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw ConfigError("png: compression failed");
  z.resize(zlen);
  put_chunk(f, "IDAT", z);
  put_chunk(f, "IEND", {});
}

namespace {

struct Rgb {
  uint8_t r, g, b;
};

// distinct phase colors; void stays white
const Rgb kPalette[] = {{214, 69, 65},  {31, 119, 180}, {44, 160, 44},
                        {255, 127, 14}, {148, 103, 189}, {140, 86, 75},
                        {227, 119, 194}, {127, 127, 127}};

int pick_scale(const GridDomain& d, int scale) {
  if (scale > 0) return scale;
  return std::max(1, 512 / std::max(d.cells[0], d.cells[1]));
}

}  // namespace

void write_phase_heatmap(const std::filesystem::path& path, const GridDomain& domain,
                         const std::vector<IndicatorSet>& phases, int scale) {
  if (domain.dim != 2) return;  // heatmaps are 2D artifacts
  const int s = pick_scale(domain, scale);
  Image img(domain.cells[0] * s, domain.cells[1] * s);
  for (int j = 0; j < domain.cells[1]; ++j)
    for (int i = 0; i < domain.cells[0]; ++i) {
      const int64_t id = domain.index(i, j, 0);
      Rgb c{255, 255, 255};
      if (!domain.in_mask(id)) c = {230, 230, 230};
      for (size_t p = 0; p < phases.size(); ++p)
        if (phases[p].support[size_t(id)]) c = kPalette[p % 8];
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx)
          img.set(i * s + dx, (domain.cells[1] - 1 - j) * s + dy, c.r, c.g, c.b);
    }
  write_png(path, img);
}

void write_field_heatmap(const std::filesystem::path& path, const GridDomain& domain,
                         const std::vector<double>& values, int scale) {
  if (domain.dim != 2) return;
  const int s = pick_scale(domain, scale);
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;
  Image img(domain.cells[0] * s, domain.cells[1] * s);
  for (int j = 0; j < domain.cells[1]; ++j)
    for (int i = 0; i < domain.cells[0]; ++i) {
      const double t = std::clamp(values[size_t(domain.index(i, j, 0))] / vmax, 0.0, 1.0);
      // white -> blue ramp
      const uint8_t r = uint8_t(255 * (1.0 - t));
      const uint8_t g = uint8_t(255 * (1.0 - 0.6 * t));
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx)
          img.set(i * s + dx, (domain.cells[1] - 1 - j) * s + dy, r, g, 255);
    }
  write_png(path, img);
}

void write_curve_plot(const std::filesystem::path& path, const std::vector<Curve>& curves,
                      bool logx, bool logy, int width, int height) {
  Image img(width, height);
  const int ml = 50, mr = 15, mt = 15, mb = 35;
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  auto tx = [&](double v) { return logx ? std::log10(std::max(v, 1e-300)) : v; };
  auto ty = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };
  for (const auto& c : curves)
    for (size_t i = 0; i < c.x.size(); ++i) {
      xlo = std::min(xlo, tx(c.x[i]));
      xhi = std::max(xhi, tx(c.x[i]));
      ylo = std::min(ylo, ty(c.y[i]));
      yhi = std::max(yhi, ty(c.y[i]));
    }
  if (!(xhi > xlo)) xhi = xlo + 1.0;
  if (!(yhi > ylo)) {
    ylo -= 0.5;
    yhi += 0.5;
  }
  auto px = [&](double v) {
    return ml + (tx(v) - xlo) / (xhi - xlo) * (width - ml - mr);
  };
  auto py = [&](double v) {
    return height - mb - (ty(v) - ylo) / (yhi - ylo) * (height - mt - mb);
  };
  // frame
  img.line(ml, mt, ml, height - mb, 0, 0, 0);
  img.line(ml, height - mb, width - mr, height - mb, 0, 0, 0);
  img.line(width - mr, mt, width - mr, height - mb, 160, 160, 160);
  img.line(ml, mt, width - mr, mt, 160, 160, 160);
  for (const auto& c : curves)
    for (size_t i = 0; i + 1 < c.x.size(); ++i)
      img.line(px(c.x[i]), py(c.y[i]), px(c.x[i + 1]), py(c.y[i + 1]), c.r, c.g, c.b);
  write_png(path, img);
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream f(path);
  if (!f) throw ConfigError("manifest: cannot open " + path.string());
  for (const auto& [k, v] : entries) f << k << "=" << v << "\n";
}

}  // namespace spshape::io
