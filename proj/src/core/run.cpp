#include "run.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "io.hpp"
#include "theory.hpp"

namespace spshape {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
}

std::vector<std::pair<std::string, std::string>> base_manifest(const RunConfig& cfg,
                                                               const std::string& sub) {
  return {{"tool", "spshape"},
          {"version", kVersion},
          {"subcommand", sub},
          {"seed", std::to_string(cfg.seed)},
          {"domain.h", io::CsvWriter::format(cfg.domain.extent[0] / cfg.domain.cells[0])},
          {"eigs.rel_tol", io::CsvWriter::format(cfg.optimizer.eval.eigs.rel_tol)},
          {"cg.rel_tol", io::CsvWriter::format(cfg.optimizer.eval.cg.rel_tol)}};
}

std::vector<double> radii_list(double rmin, double rmax, int count, bool log_spacing) {
  std::vector<double> out;
  if (count < 2) {
    out.push_back(rmin);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double t = double(i) / (count - 1);
    out.push_back(log_spacing ? rmin * std::pow(rmax / rmin, t)
                              : rmin + t * (rmax - rmin));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

void cmd_solve(const RunConfig& cfg, const std::string& outdir) {
  if (!cfg.solve) throw ConfigError("config: missing 'solve' section");
  ensure_dir(outdir);
  const SolveConfig& sc = *cfg.solve;
  DomainPtr domain = make_domain(cfg.domain);
  IndicatorSet support = make_shape(domain, sc.support);
  if (support.count() == 0) throw DomainError("solve: empty support");

  LaplaceOperator op;
  if (sc.mode == BoundaryMode::Exact) {
    op = assemble_exact(support);
  } else {
    PhaseField phi{domain, std::vector<double>(support.support.begin(), support.support.end()), 0};
    op = assemble_penalized(phi, sc.mu);
  }

  auto manifest = base_manifest(cfg, "solve");
  manifest.emplace_back("mode", sc.mode == BoundaryMode::Exact ? "exact" : "penalized");
  manifest.emplace_back("mu", io::CsvWriter::format(sc.mu));
  std::vector<std::pair<std::string, double>> summary;
  summary.emplace_back("support_measure", measure(support));

  if (sc.kind != SolveConfig::Kind::Eigs) {
    TorsionField w = solve_torsion(op);
    summary.emplace_back("torsion_energy", torsion_energy(w));
    summary.emplace_back("torsion_max", *std::max_element(w.w.begin(), w.w.end()));
    summary.emplace_back("torsion_cg_iterations", double(w.iterations));
    if (cfg.want_spfield)
      io::write_spfield(fs::path(outdir) / "torsion.spfield", *domain, w.w, cfg.binary_fields);
    if (cfg.want_png)
      io::write_field_heatmap(fs::path(outdir) / "torsion.png", *domain, w.w);
  }
  if (sc.kind != SolveConfig::Kind::Torsion) {
    auto pairs = eigs_smallest(op, sc.k);
    for (const auto& ep : pairs) {
      summary.emplace_back("lambda_" + std::to_string(ep.index), ep.lambda);
      if (cfg.want_spfield)
        io::write_spfield(fs::path(outdir) / ("eigen_" + std::to_string(ep.index) + ".spfield"),
                          *domain, ep.u, cfg.binary_fields);
    }
    if (cfg.want_png)
      io::write_field_heatmap(fs::path(outdir) / "eigen_1.png", *domain, pairs[0].u);
  }

  if (cfg.want_csv) {
    io::CsvWriter csv(fs::path(outdir) / "summary.csv", {"quantity", "value"});
    for (const auto& [k, v] : summary) csv.row_mixed({k, io::CsvWriter::format(v)});
  }
  io::write_manifest(fs::path(outdir) / "manifest.txt", manifest);
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> trace_header(int h) {
  std::vector<std::string> cols = {"stage", "mu", "iter", "objective"};
  for (int i = 0; i < h; ++i) cols.push_back("F_" + std::to_string(i));
  for (int i = 0; i < h; ++i) cols.push_back("measure_" + std::to_string(i));
  cols.push_back("step");
  cols.push_back("halvings");
  return cols;
}

Json objective_value_json(const ObjectiveValue& v) {
  Json j;
  j["F"] = v.F;
  j["measures"] = v.measures;
  j["g"] = v.g;
  j["total"] = v.total;
  return j;
}

}  // namespace

void cmd_optimize(const RunConfig& cfg, const std::string& outdir) {
  if (!cfg.objective) throw ConfigError("config: missing 'objective' section");
  ensure_dir(outdir);
  DomainPtr domain = make_domain(cfg.domain);
  const ObjectiveSpec& obj = *cfg.objective;
  const int h = obj.phase_count();

  int stage_counter = 0;
  auto on_stage = [&](const TraceRow&, const std::vector<PhaseField>& phases) {
    if (cfg.want_spfield) {
      for (int i = 0; i < h; ++i)
        io::write_spfield(fs::path(outdir) / ("phase" + std::to_string(i) + "_stage" +
                                              std::to_string(stage_counter) + ".spfield"),
                          *domain, phases[size_t(i)].values, cfg.binary_fields);
    }
    ++stage_counter;
  };

  OptimizationResult res = run(obj, domain, cfg.optimizer, on_stage);

  // objective trace (checkpoint file)
  io::CsvWriter csv(fs::path(outdir) / "trace.csv", trace_header(h));
  for (const auto& row : res.trace) {
    std::vector<double> vals = {double(row.stage), row.mu, double(row.iter), row.objective};
    vals.insert(vals.end(), row.F.begin(), row.F.end());
    vals.insert(vals.end(), row.measures.begin(), row.measures.end());
    vals.push_back(row.step);
    vals.push_back(double(row.halvings));
    csv.row(vals);
  }

  if (cfg.want_spfield) {
    for (int i = 0; i < h; ++i) {
      io::write_spfield(fs::path(outdir) / ("phase" + std::to_string(i) + ".spfield"), *domain,
                        res.densities[size_t(i)].values, cfg.binary_fields);
      std::vector<double> sup(res.supports[size_t(i)].support.begin(),
                              res.supports[size_t(i)].support.end());
      io::write_spfield(fs::path(outdir) / ("support" + std::to_string(i) + ".spfield"),
                        *domain, sup, cfg.binary_fields);
    }
  }
  if (cfg.want_png)
    io::write_phase_heatmap(fs::path(outdir) / "phases.png", *domain, res.supports);

  double support_measure = 0.0;
  for (const auto& s : res.supports) support_measure += measure(s);
  Json summary;
  summary["phase_count"] = h;
  summary["m"] = obj.m;
  summary["seed"] = cfg.seed;
  summary["penalized"] = objective_value_json(res.penalized);
  if (res.exact_valid) summary["exact"] = objective_value_json(res.exact);
  summary["exact_valid"] = res.exact_valid;
  summary["stalled"] = res.stalled;
  summary["degeneracy_warnings"] = res.degeneracy_warnings;
  summary["line_search_failures"] = res.line_search_failures;
  summary["domain_measure"] = domain->total_measure();
  summary["void_measure"] = domain->total_measure() - support_measure;
  std::ofstream(fs::path(outdir) / "summary.json") << summary.dump(2) << "\n";

  auto manifest = base_manifest(cfg, "optimize");
  manifest.emplace_back("phases", std::to_string(h));
  manifest.emplace_back("m", io::CsvWriter::format(obj.m));
  manifest.emplace_back("stalled", res.stalled ? "1" : "0");
  io::write_manifest(fs::path(outdir) / "manifest.txt", manifest);
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct VerifyInput {
  DomainPtr domain;
  std::vector<IndicatorSet> supports;
  double m = 0.0;
  int h = 0;
};

VerifyInput load_verify_input(const VerifyConfig& vc) {
  VerifyInput in;
  const fs::path dir(vc.input);
  if (!fs::exists(dir / "summary.json"))
    throw ConfigError("verify: missing " + (dir / "summary.json").string());
  Json summary;
  std::ifstream(dir / "summary.json") >> summary;
  in.m = summary.at("m").get<double>();
  in.h = summary.at("phase_count").get<int>();
  for (int i = 0; i < in.h; ++i) {
    const fs::path p = dir / ("support" + std::to_string(i) + ".spfield");
    if (!fs::exists(p)) throw ConfigError("verify: missing " + p.string());
    io::LoadedField lf = io::read_spfield(p);
    if (!in.domain) {
      auto dom = std::make_shared<GridDomain>();
      dom->dim = lf.dim;
      dom->cells = lf.cells;
      dom->h = lf.h;
      for (int a = 0; a < lf.dim; ++a) dom->extent[size_t(a)] = lf.h * lf.cells[size_t(a)];
      dom->mask.assign(size_t(dom->cell_count()), 1);
      in.domain = dom;
    }
    IndicatorSet s{in.domain, std::vector<uint8_t>(lf.values.size(), 0)};
    for (size_t c = 0; c < lf.values.size(); ++c) s.support[c] = lf.values[c] >= 0.5 ? 1 : 0;
    in.supports.push_back(std::move(s));
  }
  return in;
}

bool selected(const VerifyConfig& vc, const std::string& name) {
  if (vc.checks.empty()) return true;
  return std::find(vc.checks.begin(), vc.checks.end(), name) != vc.checks.end();
}

void append_kv(std::ofstream& f, const std::string& k, const std::string& v) {
  f << k << "=" << v << "\n";
}

}  // namespace

void cmd_verify(const RunConfig& cfg, const std::string& outdir) {
  if (!cfg.verify) throw ConfigError("config: missing 'verify' section");
  ensure_dir(outdir);
  const VerifyConfig& vc = *cfg.verify;
  VerifyInput in = load_verify_input(vc);
  const double h = in.domain->h;

  io::CsvWriter table(fs::path(outdir) / "verify.csv", {"check", "phase", "pass", "detail"});
  auto emit = [&](const std::string& check, int phase, bool pass, const std::string& detail) {
    table.row_mixed({check, std::to_string(phase), pass ? "1" : "0", detail});
  };

  // exact torsion and lambda_1 per phase feed several checks
  std::vector<TorsionField> torsions;
  std::vector<double> lambda1(size_t(in.h), 0.0);
  for (int i = 0; i < in.h; ++i) {
    if (in.supports[size_t(i)].count() == 0)
      throw DomainError("verify: phase " + std::to_string(i) + " has empty support");
    LaplaceOperator op = assemble_exact(in.supports[size_t(i)]);
    torsions.push_back(solve_torsion(op));
    lambda1[size_t(i)] = eigs_smallest(op, 1)[0].lambda;
  }

  if (selected(vc, "subsolution")) {
    std::ofstream rep(fs::path(outdir) / "subsolution.txt");
    for (int i = 0; i < in.h; ++i) {
      const IndicatorSet& s = in.supports[size_t(i)];
      SubsolutionOptions opts;
      opts.count = vc.subsolution_count;
      opts.seed = cfg.seed + uint64_t(i) * 1000003ull;
      opts.lambda_probe = true;
      opts.slack = vc.subsolution_slack_factor * h * measure(s);
      SubsolutionReport r = subsolution_test(s, in.m, opts);
      // Thm 5.3 chain: the cell is an energy subsolution at the effective
      // multiplier m/(2C), C the empirical gamma-Lip constant of lambda_1.
      const double m_eff = r.glip_max > 0.0 ? in.m / (2.0 * r.glip_max) : in.m;
      int passed = 0, valid = 0;
      double lambda_margin_min = std::numeric_limits<double>::infinity();
      for (const auto& rec : r.records) {
        if (rec.skipped) continue;
        ++valid;
        if (rec.trivial || rec.delta_E - m_eff * rec.delta_meas >= -opts.slack) ++passed;
        if (!rec.trivial)
          lambda_margin_min =
              std::min(lambda_margin_min, rec.delta_lambda1 - in.m * rec.delta_meas);
      }
      const double frac = valid > 0 ? double(passed) / valid : 0.0;
      append_kv(rep, "phase", std::to_string(i));
      append_kv(rep, "m_run", io::CsvWriter::format(in.m));
      append_kv(rep, "glip_constant", io::CsvWriter::format(r.glip_max));
      append_kv(rep, "m_eff", io::CsvWriter::format(m_eff));
      append_kv(rep, "slack", io::CsvWriter::format(opts.slack));
      append_kv(rep, "pass_fraction", io::CsvWriter::format(frac));
      append_kv(rep, "lambda_margin_min", io::CsvWriter::format(lambda_margin_min));
      for (const auto& rec : r.records) {
        rep << "  perturbation kind=" << rec.kind << " r=" << io::CsvWriter::format(rec.radius)
            << " dE=" << io::CsvWriter::format(rec.delta_E)
            << " dmeas=" << io::CsvWriter::format(rec.delta_meas)
            << " d_gamma=" << io::CsvWriter::format(rec.d_gamma)
            << " ratio=" << io::CsvWriter::format(rec.ratio)
            << " margin_eff=" << io::CsvWriter::format(rec.delta_E - m_eff * rec.delta_meas)
            << (rec.skipped ? " skipped" : "") << (rec.trivial ? " trivial" : "") << "\n";
      }
      emit("subsolution", i, frac >= 0.95, "pass_fraction=" + io::CsvWriter::format(frac));
    }
  }

  if (selected(vc, "perimeter_bound")) {
    std::ofstream rep(fs::path(outdir) / "perimeter_bound.txt");
    for (int i = 0; i < in.h; ++i) {
      const IndicatorSet& s = in.supports[size_t(i)];
      SubsolutionOptions gopts;
      gopts.count = std::max(8, vc.subsolution_count / 2);
      gopts.seed = cfg.seed + 77777ull + uint64_t(i);
      gopts.lambda_probe = true;
      SubsolutionReport gl = subsolution_test(s, in.m, gopts);
      const double m_eff = gl.glip_max > 0.0 ? in.m / (2.0 * gl.glip_max) : in.m;
      PerimeterBoundReport r1 = perimeter_bound_check(s, m_eff, lambda1[size_t(i)], vc.perimeter_tol);
      PerimeterBoundReport r2 = perimeter_bound_check(s, in.m, lambda1[size_t(i)], vc.perimeter_tol);
      append_kv(rep, "phase", std::to_string(i));
      append_kv(rep, "perimeter_smoothed", io::CsvWriter::format(r1.perimeter));
      append_kv(rep, "measure", io::CsvWriter::format(r1.measure));
      append_kv(rep, "lambda1", io::CsvWriter::format(lambda1[size_t(i)]));
      append_kv(rep, "m_eff", io::CsvWriter::format(m_eff));
      append_kv(rep, "ratio1_energy", io::CsvWriter::format(r1.ratio1));
      append_kv(rep, "ratio2_lambda", io::CsvWriter::format(r2.ratio2));
      emit("perimeter_bound", i, r1.ratio1_ok && r2.ratio2_ok,
           "ratio1=" + io::CsvWriter::format(r1.ratio1) +
               " ratio2=" + io::CsvWriter::format(r2.ratio2));
    }
  }

  if (selected(vc, "lower_bound")) {
    std::ofstream rep(fs::path(outdir) / "lower_bound.txt");
    for (int i = 0; i < in.h; ++i) {
      LowerBoundReport r = lower_bound_check(in.supports[size_t(i)], in.m, lambda1[size_t(i)]);
      append_kv(rep, "phase", std::to_string(i));
      append_kv(rep, "measure_m_scaled", io::CsvWriter::format(r.measure_scaled));
      append_kv(rep, "lambda_m_scaled", io::CsvWriter::format(r.lambda_scaled));
      emit("lower_bound", i, true,
           "lambda_scaled=" + io::CsvWriter::format(r.lambda_scaled));
    }
  }

  if (selected(vc, "junction")) {
    const double r = vc.junction_radius_cells * h;
    JunctionReport jr = junction_scan(in.supports, r);
    std::ofstream rep(fs::path(outdir) / "junction.txt");
    append_kv(rep, "scan_radius", io::CsvWriter::format(r));
    append_kv(rep, "z1_simple", std::to_string(jr.z1));
    append_kv(rep, "z2_internal", std::to_string(jr.z2_internal));
    append_kv(rep, "z2_boundary", std::to_string(jr.z2_boundary));
    append_kv(rep, "triple_candidates", std::to_string(jr.triple_candidates));
    emit("junction", -1, jr.triple_candidates == 0,
         "triples=" + std::to_string(jr.triple_candidates));
  }

  if (selected(vc, "separation")) {
    SeparationReport sr = separation_check(in.supports, torsions);
    std::ofstream rep(fs::path(outdir) / "separation.txt");
    double worst = 0.0;
    for (const auto& p : sr.pairs) {
      rep << "pair " << p.i << "," << p.j << " touch=" << (p.bands_touch ? 1 : 0)
          << " interface_max=" << io::CsvWriter::format(p.interface_max)
          << " relative=" << io::CsvWriter::format(p.relative)
          << " own_side_relative=" << io::CsvWriter::format(p.own_side_relative) << "\n";
      worst = std::max(worst, p.relative);
    }
    for (int i = 0; i < in.h; ++i)
      append_kv(rep, "omega_outside_D" + std::to_string(i),
                std::to_string(sr.omega_outside_Di[size_t(i)]));
    emit("separation", -1, worst <= vc.separation_tol,
         "max_relative=" + io::CsvWriter::format(worst));
  }

  if (selected(vc, "growth") || selected(vc, "density") || selected(vc, "linear_growth")) {
    const std::vector<double> radii = {2 * h, 4 * h, 8 * h, 16 * h};
    for (int i = 0; i < in.h; ++i) {
      IndicatorSet band = boundary_cells(in.supports[size_t(i)]);
      int64_t x0_id = -1;
      double wbest = -1.0;
      for (int64_t id = 0; id < in.domain->cell_count(); ++id)
        if (band.support[size_t(id)] && torsions[size_t(i)].w[size_t(id)] > wbest) {
          wbest = torsions[size_t(i)].w[size_t(id)];
          x0_id = id;
        }
      const Point x0 = in.domain->center(x0_id);
      if (selected(vc, "growth")) {
        auto rows = growth_profile(torsions[size_t(i)], x0, radii);
        io::CsvWriter gcsv(fs::path(outdir) / ("growth_phase" + std::to_string(i) + ".csv"),
                           {"r", "sup", "shell_mean"});
        for (const auto& row : rows)
          if (!row.skipped) gcsv.row({row.r, row.sup, row.shell_mean});
        emit("growth", i, true, "rows=" + std::to_string(rows.size()));
      }
      if (selected(vc, "density")) {
        auto dp = density_profile(in.supports[size_t(i)], x0, radii);
        io::CsvWriter dcsv(fs::path(outdir) / ("density_phase" + std::to_string(i) + ".csv"),
                           {"r", "ratio"});
        for (size_t q = 0; q < dp.radii.size(); ++q) dcsv.row({dp.radii[q], dp.ratios[q]});
        emit("density", i, true, "max_ratio=" + io::CsvWriter::format(dp.max_ratio));
      }
      if (selected(vc, "linear_growth")) {
        LinearGrowthFit fit = linear_growth_fit(torsions[size_t(i)], in.supports[size_t(i)],
                                                {4 * h, 8 * h, 16 * h}, 32, cfg.seed);
        std::ofstream rep(fs::path(outdir) / ("linear_growth_phase" + std::to_string(i) + ".txt"));
        append_kv(rep, "c_fit", io::CsvWriter::format(fit.c_fit));
        append_kv(rep, "min_ratio", io::CsvWriter::format(fit.min_ratio));
        append_kv(rep, "points", std::to_string(fit.points));
        emit("linear_growth", i, fit.c_fit >= 0.01, "c_fit=" + io::CsvWriter::format(fit.c_fit));
      }
    }
  }

  io::write_manifest(fs::path(outdir) / "manifest.txt", base_manifest(cfg, "verify"));
}

// ---------------------------------------------------------------------------
// monotonicity
// ---------------------------------------------------------------------------

void cmd_monotonicity(const RunConfig& cfg, const std::string& outdir) {
  if (!cfg.monotonicity) throw ConfigError("config: missing 'monotonicity' section");
  ensure_dir(outdir);
  const MonotonicityConfig& mc = *cfg.monotonicity;

  DomainPtr domain;
  std::vector<std::vector<double>> storage;
  std::vector<ProfileField> fields;

  if (!mc.preset.empty()) {
    DomainConfig dc = cfg.domain;
    domain = make_domain(dc);
    const Point x0 = mc.center_set
                         ? mc.center
                         : Point{0.5 * domain->extent[0], 0.5 * domain->extent[1],
                                 domain->dim == 3 ? 0.5 * domain->extent[2] : 0.0};
    storage = mc.preset == "halfplanes" ? make_halfplane_fields(domain, x0)
                                        : make_sector_fields(domain, x0);
    for (const auto& s : storage)
      fields.push_back(ProfileField{&s, ProfileField::Source::Harmonic, 0.0});
  } else {
    for (size_t i = 0; i < mc.field_files.size(); ++i) {
      io::LoadedField lf = io::read_spfield(mc.field_files[i]);
      if (!domain) {
        auto dom = std::make_shared<GridDomain>();
        dom->dim = lf.dim;
        dom->cells = lf.cells;
        dom->h = lf.h;
        for (int a = 0; a < lf.dim; ++a) dom->extent[size_t(a)] = lf.h * lf.cells[size_t(a)];
        dom->mask.assign(size_t(dom->cell_count()), 1);
        domain = dom;
      } else if (lf.cells != domain->cells) {
        throw ConfigError("monotonicity: field grids disagree");
      }
      storage.push_back(std::move(lf.values));
    }
    for (size_t i = 0; i < storage.size(); ++i) {
      ProfileField f;
      f.values = &storage[i];
      f.source = i < mc.sources.size() ? mc.sources[i] : ProfileField::Source::Unknown;
      f.source_value = i < mc.source_values.size() ? mc.source_values[i] : 0.0;
      fields.push_back(f);
    }
  }

  const Point x0 = mc.center_set ? mc.center
                                 : Point{0.5 * domain->extent[0], 0.5 * domain->extent[1],
                                         domain->dim == 3 ? 0.5 * domain->extent[2] : 0.0};
  const double h = domain->h;
  double edge = std::numeric_limits<double>::infinity();
  for (int a = 0; a < domain->dim; ++a)
    edge = std::min({edge, x0[size_t(a)], domain->extent[size_t(a)] - x0[size_t(a)]});
  const double rmin = mc.rmin > 0.0 ? mc.rmin : 8.0 * h;
  const double rmax = mc.rmax > 0.0 ? mc.rmax : 0.4 * edge / 0.5;

  ProfileOptions popts;
  popts.epsilon = mc.epsilon;
  MonotonicityProfile prof = monotonicity_profile(
      domain, fields, x0, radii_list(rmin, rmax, mc.rcount, mc.log_spacing), popts);

  io::CsvWriter csv(fs::path(outdir) / "profile.csv",
                    {"r", "A_1", "A_2", "A_3", "b_1", "b_2", "b_3", "B_1", "B_2", "B_3",
                     "Phi2", "Phi3", "Phi_ctv"});
  for (size_t i = 0; i < prof.radii.size(); ++i) {
    std::vector<double> row = {prof.radii[i]};
    for (int q = 0; q < 3; ++q) row.push_back(prof.A[i][size_t(q)]);
    for (int q = 0; q < 3; ++q) row.push_back(prof.b[i][size_t(q)]);
    for (int q = 0; q < 3; ++q) row.push_back(prof.B[i][size_t(q)]);
    row.push_back(prof.phi2[i]);
    row.push_back(prof.nfields == 3 ? prof.phi3[i] : 0.0);
    row.push_back(prof.nfields == 3 && domain->dim == 2 ? prof.phi_ctv[i] : 0.0);
    csv.row(row);
  }
  io::CsvWriter dcsv(fs::path(outdir) / "dyadic.csv",
                     {"k", "A_1", "A_2", "A_3", "b_1", "b_2", "b_3", "delta"});
  for (size_t i = 0; i < prof.dyadic_k.size(); ++i) {
    std::vector<double> row = {double(prof.dyadic_k[i])};
    for (int q = 0; q < 3; ++q) row.push_back(prof.dyadic_A[i][size_t(q)]);
    for (int q = 0; q < 3; ++q) row.push_back(prof.dyadic_b[i][size_t(q)]);
    row.push_back(prof.delta[i]);
    csv.row(row);
    dcsv.row(row);
  }

  if (cfg.want_png) {
    std::vector<io::Curve> curves;
    io::Curve c2{prof.radii, prof.phi2, 31, 119, 180, "Phi2"};
    curves.push_back(c2);
    if (prof.nfields == 3) {
      curves.push_back(io::Curve{prof.radii, prof.phi3, 214, 69, 65, "Phi3"});
      if (domain->dim == 2)
        curves.push_back(io::Curve{prof.radii, prof.phi_ctv, 44, 160, 44, "Phi_ctv"});
    }
    io::write_curve_plot(fs::path(outdir) / "profile.png", curves, true, true);
  }

  auto manifest = base_manifest(cfg, "monotonicity");
  manifest.emplace_back("preset", mc.preset.empty() ? "(files)" : mc.preset);
  manifest.emplace_back("epsilon", io::CsvWriter::format(mc.epsilon));
  io::write_manifest(fs::path(outdir) / "manifest.txt", manifest);
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

int run_subcommand(const std::string& subcommand, const std::string& config_path,
                   const std::string& outdir_override, std::string* error_out) {
  try {
    RunConfig cfg = load_config(config_path);
    const std::string outdir = outdir_override.empty() ? cfg.output_dir : outdir_override;
    if (subcommand == "solve") cmd_solve(cfg, outdir);
    else if (subcommand == "optimize") cmd_optimize(cfg, outdir);
    else if (subcommand == "verify") cmd_verify(cfg, outdir);
    else if (subcommand == "monotonicity") cmd_monotonicity(cfg, outdir);
    else throw ConfigError("unknown subcommand '" + subcommand + "'");
    return 0;
  } catch (const ConfigError& e) {
    if (error_out) *error_out = e.what();
    return 2;
  } catch (const DomainError& e) {
    if (error_out) *error_out = e.what();
    return 2;
  } catch (const SolverError& e) {
    if (error_out) *error_out = e.what();
    return 3;
  } catch (const std::exception& e) {
    if (error_out) *error_out = e.what();
    return 1;
  }
}

}  // namespace spshape
