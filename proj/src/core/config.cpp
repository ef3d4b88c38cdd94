#include "config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "io.hpp"

namespace spshape {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

template <typename T>
T req(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

template <typename T>
T opt(const Json& j, const std::string& path, const char* key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

Point parse_point(const Json& j, const std::string& path) {
  auto v = j.get<std::vector<double>>();
  if (v.size() < 2 || v.size() > 3) fail(path, "expected 2 or 3 coordinates");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

ShapeSpec parse_shape(const Json& j, const std::string& path) {
  ShapeSpec s;
  const std::string kind = req<std::string>(j, path, "shape");
  if (kind == "none") s.kind = ShapeSpec::Kind::None;
  else if (kind == "full") s.kind = ShapeSpec::Kind::Full;
  else if (kind == "disk") {
    s.kind = ShapeSpec::Kind::Disk;
    s.center = parse_point(j.at("center"), path + ".center");
    s.radius = req<double>(j, path, "radius");
    if (!(s.radius > 0.0)) fail(path + ".radius", "must be > 0");
  } else if (kind == "rect") {
    s.kind = ShapeSpec::Kind::Rect;
    s.lo = parse_point(j.at("lo"), path + ".lo");
    s.hi = parse_point(j.at("hi"), path + ".hi");
  } else if (kind == "file") {
    s.kind = ShapeSpec::Kind::File;
    s.path = req<std::string>(j, path, "path");
    s.threshold = opt<double>(j, path, "threshold", 0.5);
  } else {
    fail(path + ".shape", "unknown shape '" + kind + "'");
  }
  return s;
}

DomainConfig parse_domain(const Json& j, const std::string& path) {
  DomainConfig dc;
  auto extent = req<std::vector<double>>(j, path, "extent");
  auto cells = req<std::vector<int>>(j, path, "cells");
  if (extent.size() != cells.size() || (extent.size() != 2 && extent.size() != 3))
    fail(path, "extent and cells must both have 2 or 3 entries");
  dc.dim = int(extent.size());
  dc.extent = {extent[0], extent[1], dc.dim == 3 ? extent[2] : 0.0};
  dc.cells = {cells[0], cells[1], dc.dim == 3 ? cells[2] : 1};
  if (j.contains("mask")) dc.mask = parse_shape(j.at("mask"), path + ".mask");
  else dc.mask.kind = ShapeSpec::Kind::None;
  return dc;
}

FunctionalSpec parse_functional(const Json& j, const std::string& path) {
  FunctionalSpec f;
  const std::string kind = req<std::string>(j, path, "functional");
  if (kind == "eigenvalue") {
    f.kind = FunctionalSpec::Kind::Eigenvalue;
    f.k = opt<int>(j, path, "k", 1);
  } else if (kind == "torsion_energy") {
    f.kind = FunctionalSpec::Kind::TorsionEnergy;
  } else {
    fail(path + ".functional", "unknown functional '" + kind + "'");
  }
  return f;
}

ObjectiveSpec parse_objective(const Json& j, const std::string& path) {
  ObjectiveSpec o;
  const std::string g = opt<std::string>(j, path, "g", "sum");
  if (g == "sum") o.g = ObjectiveSpec::Aggregator::Sum;
  else if (g == "max") o.g = ObjectiveSpec::Aggregator::Max;
  else if (g == "weighted_sum") o.g = ObjectiveSpec::Aggregator::WeightedSum;
  else fail(path + ".g", "unknown aggregator '" + g + "'");
  o.m = opt<double>(j, path, "m", 0.0);
  if (!j.contains("phases") || !j.at("phases").is_array() || j.at("phases").empty())
    fail(path + ".phases", "must be a nonempty array");
  for (size_t i = 0; i < j.at("phases").size(); ++i)
    o.functionals.push_back(
        parse_functional(j.at("phases")[i], path + ".phases[" + std::to_string(i) + "]"));
  if (o.g == ObjectiveSpec::Aggregator::WeightedSum)
    o.weights = req<std::vector<double>>(j, path, "weights");
  o.validate();
  return o;
}

void parse_optimizer(const Json& j, const std::string& path, OptimizerConfig& oc) {
  oc.max_iters = opt<int>(j, path, "max_iters", oc.max_iters);
  oc.step0 = opt<double>(j, path, "step0", oc.step0);
  oc.backtrack = opt<double>(j, path, "backtrack", oc.backtrack);
  oc.armijo_c = opt<double>(j, path, "armijo_c", oc.armijo_c);
  oc.max_halvings = opt<int>(j, path, "max_halvings", oc.max_halvings);
  oc.mu_schedule = opt<std::vector<double>>(j, path, "mu_schedule", oc.mu_schedule);
  oc.stop_tol = opt<double>(j, path, "stop_tol", oc.stop_tol);
  oc.stop_patience = opt<int>(j, path, "stop_patience", oc.stop_patience);
  oc.binarize_threshold = opt<double>(j, path, "binarize_threshold", oc.binarize_threshold);
  const std::string init = opt<std::string>(j, path, "init", "voronoi");
  if (init == "voronoi") oc.init = OptimizerConfig::Init::Voronoi;
  else if (init == "random") oc.init = OptimizerConfig::Init::Random;
  else if (init == "given") oc.init = OptimizerConfig::Init::Given;
  else fail(path + ".init", "unknown init '" + init + "'");
  oc.eval.eigs.rel_tol = opt<double>(j, path, "eigs_tol", oc.eval.eigs.rel_tol);
  oc.eval.gap_tol = opt<double>(j, path, "gap_tol", oc.eval.gap_tol);
  oc.validate();
}

SolveConfig parse_solve(const Json& j, const std::string& path) {
  SolveConfig s;
  const std::string kind = opt<std::string>(j, path, "kind", "both");
  if (kind == "torsion") s.kind = SolveConfig::Kind::Torsion;
  else if (kind == "eigs") s.kind = SolveConfig::Kind::Eigs;
  else if (kind == "both") s.kind = SolveConfig::Kind::Both;
  else fail(path + ".kind", "unknown kind '" + kind + "'");
  s.k = opt<int>(j, path, "k", 1);
  if (s.k < 1 || s.k > 20) fail(path + ".k", "must lie in [1,20]");
  const std::string mode = opt<std::string>(j, path, "mode", "exact");
  if (mode == "exact") s.mode = BoundaryMode::Exact;
  else if (mode == "penalized") s.mode = BoundaryMode::Penalized;
  else fail(path + ".mode", "unknown mode '" + mode + "'");
  s.mu = opt<double>(j, path, "mu", 1e4);
  if (j.contains("support")) s.support = parse_shape(j.at("support"), path + ".support");
  else s.support.kind = ShapeSpec::Kind::Full;
  return s;
}

VerifyConfig parse_verify(const Json& j, const std::string& path) {
  VerifyConfig v;
  v.input = req<std::string>(j, path, "input");
  v.checks = opt<std::vector<std::string>>(j, path, "checks", {});
  v.subsolution_count = opt<int>(j, path, "subsolution_count", 20);
  v.subsolution_slack_factor = opt<double>(j, path, "subsolution_slack_factor", 5.0);
  v.junction_radius_cells = opt<int>(j, path, "junction_radius_cells", 4);
  v.separation_tol = opt<double>(j, path, "separation_tol", 0.05);
  v.perimeter_tol = opt<double>(j, path, "perimeter_tol", 0.15);
  return v;
}

MonotonicityConfig parse_monotonicity(const Json& j, const std::string& path) {
  MonotonicityConfig m;
  m.preset = opt<std::string>(j, path, "preset", "");
  if (!m.preset.empty() && m.preset != "halfplanes" && m.preset != "sectors")
    fail(path + ".preset", "unknown preset '" + m.preset + "'");
  m.field_files = opt<std::vector<std::string>>(j, path, "fields", {});
  if (m.preset.empty() && m.field_files.empty())
    fail(path, "needs either a preset or field files");
  if (j.contains("sources")) {
    for (size_t i = 0; i < j.at("sources").size(); ++i) {
      const Json& s = j.at("sources")[i];
      const std::string spath = path + ".sources[" + std::to_string(i) + "]";
      const std::string type = req<std::string>(s, spath, "type");
      if (type == "harmonic") {
        m.sources.push_back(ProfileField::Source::Harmonic);
        m.source_values.push_back(0.0);
      } else if (type == "constant") {
        m.sources.push_back(ProfileField::Source::Constant);
        m.source_values.push_back(opt<double>(s, spath, "value", 1.0));
      } else if (type == "eigen") {
        m.sources.push_back(ProfileField::Source::Eigen);
        m.source_values.push_back(req<double>(s, spath, "lambda"));
      } else if (type == "unknown") {
        m.sources.push_back(ProfileField::Source::Unknown);
        m.source_values.push_back(0.0);
      } else {
        fail(spath + ".type", "unknown source type '" + type + "'");
      }
    }
  }
  if (j.contains("center")) {
    m.center = parse_point(j.at("center"), path + ".center");
    m.center_set = true;
  }
  if (j.contains("radii")) {
    const Json& r = j.at("radii");
    m.rmin = opt<double>(r, path + ".radii", "min", 0.0);
    m.rmax = opt<double>(r, path + ".radii", "max", 0.0);
    m.rcount = opt<int>(r, path + ".radii", "count", 24);
    m.log_spacing = opt<std::string>(r, path + ".radii", "spacing", "log") == "log";
  }
  m.epsilon = opt<double>(j, path, "epsilon", 0.5);
  return m;
}

}  // namespace

RunConfig parse_config(const Json& j) {
  RunConfig rc;
  rc.seed = opt<uint64_t>(j, "", "seed", 1);
  rc.output_dir = opt<std::string>(j, "", "output_dir", "out");
  rc.binary_fields = opt<bool>(j, "", "binary_fields", false);
  if (j.contains("formats")) {
    rc.want_csv = rc.want_spfield = rc.want_png = false;
    for (const auto& f : j.at("formats")) {
      const std::string s = f.get<std::string>();
      if (s == "csv") rc.want_csv = true;
      else if (s == "spfield") rc.want_spfield = true;
      else if (s == "png") rc.want_png = true;
      else fail("formats", "unknown format '" + s + "'");
    }
  }
  if (j.contains("domain")) rc.domain = parse_domain(j.at("domain"), "domain");
  if (j.contains("solve")) rc.solve = parse_solve(j.at("solve"), "solve");
  if (j.contains("objective")) rc.objective = parse_objective(j.at("objective"), "objective");
  if (j.contains("optimizer")) parse_optimizer(j.at("optimizer"), "optimizer", rc.optimizer);
  rc.optimizer.seed = rc.seed;
  if (j.contains("verify")) rc.verify = parse_verify(j.at("verify"), "verify");
  if (j.contains("monotonicity"))
    rc.monotonicity = parse_monotonicity(j.at("monotonicity"), "monotonicity");
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  Json j;
  try {
    j = Json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

DomainPtr make_domain(const DomainConfig& dc) {
  std::function<bool(const Point&)> pred;
  const ShapeSpec& m = dc.mask;
  switch (m.kind) {
    case ShapeSpec::Kind::None:
    case ShapeSpec::Kind::Full:
      break;
    case ShapeSpec::Kind::Disk:
      pred = [m, dim = dc.dim](const Point& p) {
        double d2 = sq(p[0] - m.center[0]) + sq(p[1] - m.center[1]);
        if (dim == 3) d2 += sq(p[2] - m.center[2]);
        return d2 <= sq(m.radius);
      };
      break;
    case ShapeSpec::Kind::Rect:
      pred = [m, dim = dc.dim](const Point& p) {
        for (int a = 0; a < dim; ++a)
          if (p[size_t(a)] < m.lo[size_t(a)] || p[size_t(a)] > m.hi[size_t(a)]) return false;
        return true;
      };
      break;
    case ShapeSpec::Kind::File:
      throw ConfigError("domain.mask: file masks are not supported");
  }
  return build_domain(dc.dim, dc.extent, dc.cells, pred);
}

IndicatorSet make_shape(const DomainPtr& domain, const ShapeSpec& s) {
  const GridDomain& d = *domain;
  IndicatorSet out{domain, std::vector<uint8_t>(size_t(d.cell_count()), 0)};
  switch (s.kind) {
    case ShapeSpec::Kind::None:
    case ShapeSpec::Kind::Full:
      out.support.assign(d.mask.begin(), d.mask.end());
      break;
    case ShapeSpec::Kind::Disk:
      return set_intersection(ball_cells(domain, s.center, s.radius),
                              IndicatorSet{domain, {d.mask.begin(), d.mask.end()}});
    case ShapeSpec::Kind::Rect:
      for (int64_t id = 0; id < d.cell_count(); ++id) {
        if (!d.in_mask(id)) continue;
        const Point p = d.center(id);
        bool in = true;
        for (int a = 0; a < d.dim; ++a)
          if (p[size_t(a)] < s.lo[size_t(a)] || p[size_t(a)] > s.hi[size_t(a)]) in = false;
        out.support[size_t(id)] = in;
      }
      break;
    case ShapeSpec::Kind::File: {
      io::LoadedField lf = io::read_spfield(s.path);
      if (lf.dim != d.dim || lf.cells != d.cells)
        throw ConfigError("support file '" + s.path + "' does not match the domain grid");
      for (int64_t id = 0; id < d.cell_count(); ++id)
        out.support[size_t(id)] =
            d.in_mask(id) && lf.values[size_t(id)] >= s.threshold ? 1 : 0;
      break;
    }
  }
  return out;
}

}  // namespace spshape
