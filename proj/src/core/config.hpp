#pragma once

#include <nlohmann/json_fwd.hpp>

#include "optimize.hpp"
#include "theory.hpp"

namespace spshape {

using Json = nlohmann::json;

// Shapes used for masks and solve supports.
struct ShapeSpec {
  enum class Kind { None, Full, Disk, Rect, File };
  Kind kind = Kind::Full;
  Point center{};
  double radius = 0.0;
  Point lo{}, hi{};
  std::string path;        // SPFIELD file
  double threshold = 0.5;  // binarization threshold for file shapes
};

struct DomainConfig {
  int dim = 2;
  std::array<double, 3> extent{1.0, 1.0, 0.0};
  std::array<int, 3> cells{128, 128, 1};
  ShapeSpec mask;  // Kind::None means the full box
};

struct SolveConfig {
  enum class Kind { Torsion, Eigs, Both };
  Kind kind = Kind::Both;
  int k = 1;
  BoundaryMode mode = BoundaryMode::Exact;
  double mu = 1e4;
  ShapeSpec support;
};

struct VerifyConfig {
  std::string input;                 // a prior optimize output directory
  std::vector<std::string> checks;   // empty -> all
  int subsolution_count = 20;
  double subsolution_slack_factor = 5.0;  // slack = factor * h * |Omega|
  int junction_radius_cells = 4;
  double separation_tol = 0.05;
  double perimeter_tol = 0.15;
};

struct MonotonicityConfig {
  std::string preset;                 // "halfplanes" | "sectors" | "" (files)
  std::vector<std::string> field_files;
  std::vector<ProfileField::Source> sources;
  std::vector<double> source_values;
  Point center{};
  bool center_set = false;
  double rmin = 0.0, rmax = 0.0;      // 0 -> defaults [8h, 0.4*extent/2]
  int rcount = 24;
  bool log_spacing = true;
  double epsilon = 0.5;
};

struct RunConfig {
  uint64_t seed = 1;
  std::string output_dir = "out";
  bool want_csv = true, want_spfield = true, want_png = true;
  bool binary_fields = false;
  DomainConfig domain;
  std::optional<SolveConfig> solve;
  std::optional<ObjectiveSpec> objective;
  OptimizerConfig optimizer;
  std::optional<VerifyConfig> verify;
  std::optional<MonotonicityConfig> monotonicity;
};

RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);

DomainPtr make_domain(const DomainConfig& dc);
IndicatorSet make_shape(const DomainPtr& domain, const ShapeSpec& shape);

}  // namespace spshape
