#include "theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace spshape {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist2(const Point& a, const Point& b, int dim) {
  double s = sq(a[0] - b[0]) + sq(a[1] - b[1]);
  if (dim == 3) s += sq(a[2] - b[2]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// subsolution test
// ---------------------------------------------------------------------------

SubsolutionReport subsolution_test(const IndicatorSet& set, double m,
                                   const SubsolutionOptions& opts) {
  if (!(m > 0.0)) throw ConfigError("subsolution_test: m must be > 0");
  if (set.count() == 0) throw DomainError("subsolution_test: empty set");

  SubsolutionReport rep;
  rep.m = m;
  LaplaceOperator op0 = assemble_exact(set);
  TorsionField w0 = solve_torsion(op0, opts.cg);
  rep.E = torsion_energy(w0);
  rep.meas = measure(set);
  double lam0 = 0.0;
  if (opts.lambda_probe) {
    lam0 = eigs_smallest(op0, 1, opts.eigs)[0].lambda;
    rep.lambda1 = lam0;
  }

  const GridDomain& d = *set.domain;
  const int dim = d.dim;
  const double h = d.h;
  const double rmax = std::pow(rep.meas, 1.0 / dim) / 4.0;
  std::vector<int64_t> cells;
  for (int64_t id = 0; id < d.cell_count(); ++id)
    if (set.support[size_t(id)]) cells.push_back(id);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  IndicatorSet band = boundary_cells(set);

  for (int s = 0; s < opts.count; ++s) {
    PerturbationRecord rec;
    IndicatorSet pert = set;
    if (uni(rng) < opts.ball_fraction || rmax < 2.0 * h) {
      rec.kind = "ball";
      const int64_t cid = cells[size_t(uni(rng) * double(cells.size())) % cells.size()];
      rec.center = d.center(cid);
      const double lo = std::log(2.0 * h), hi = std::log(std::max(rmax, 2.0 * h + 1e-12));
      rec.radius = std::exp(lo + uni(rng) * (hi - lo));
      IndicatorSet hole = ball_cells(set.domain, rec.center, rec.radius);
      pert = set_difference(set, hole);
    } else {
      rec.kind = "erosion";
      const double p = 0.5 + 0.5 * uni(rng);
      for (size_t id = 0; id < pert.support.size(); ++id)
        if (band.support[id] && uni(rng) < p) pert.support[id] = 0;
    }

    rec.delta_meas = rep.meas - measure(pert);
    if (pert.count() == 0) {
      rec.skipped = true;
      rep.records.push_back(rec);
      continue;
    }
    if (rec.delta_meas == 0.0) {
      rec.trivial = true;
      rec.pass = true;
      rep.records.push_back(rec);
      ++rep.valid;
      ++rep.passed;
      continue;
    }
    LaplaceOperator opp = assemble_exact(pert);
    TorsionField wp = solve_torsion(opp, opts.cg);
    rec.delta_E = torsion_energy(wp) - rep.E;
    rec.d_gamma = gamma_distance(wp, w0);
    rec.margin = rec.delta_E - m * rec.delta_meas;
    rec.ratio = rec.d_gamma > 0.0 ? 2.0 * m * rec.delta_meas / rec.d_gamma : 0.0;
    rec.pass = rec.margin >= -opts.slack;
    if (opts.lambda_probe) {
      const double lamp = eigs_smallest(opp, 1, opts.eigs)[0].lambda;
      rec.delta_lambda1 = lamp - lam0;
      rec.glip_ratio = rec.d_gamma > 0.0 ? std::abs(rec.delta_lambda1) / rec.d_gamma : 0.0;
      rep.glip_max = std::max(rep.glip_max, rec.glip_ratio);
    }
    ++rep.valid;
    if (rec.pass) ++rep.passed;
    rep.records.push_back(rec);
  }
  rep.pass_fraction = rep.valid > 0 ? double(rep.passed) / double(rep.valid) : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// growth / density profiles
// ---------------------------------------------------------------------------

std::vector<GrowthRow> growth_profile(const TorsionField& w, const Point& x0,
                                      const std::vector<double>& radii) {
  const GridDomain& d = *w.domain;
  std::vector<GrowthRow> rows;
  for (double r : radii) {
    GrowthRow row;
    row.r = r;
    if (r < 2.0 * d.h) throw DomainError("growth_profile: radii must be >= 2h");
    double sup = 0.0, mean = 0.0;
    int64_t nshell = 0;
    const double r2hi = sq(r + 0.5 * d.h), r2lo = sq(std::max(r - 0.5 * d.h, 0.0));
    const double rr = r * r;
    for (int64_t id = 0; id < d.cell_count(); ++id) {
      if (!d.in_mask(id)) continue;
      const double dd = dist2(d.center(id), x0, d.dim);
      if (dd <= rr) sup = std::max(sup, w.w[size_t(id)]);
      if (dd >= r2lo && dd <= r2hi) {
        mean += w.w[size_t(id)];
        ++nshell;
      }
    }
    if (nshell == 0) {
      row.skipped = true;
    } else {
      row.sup = sup;
      row.shell_mean = mean / double(nshell);
    }
    rows.push_back(row);
  }
  return rows;
}

DensityProfileResult density_profile(const IndicatorSet& set, const Point& x0,
                                     const std::vector<double>& radii) {
  DensityProfileResult out;
  for (double r : radii) {
    out.radii.push_back(r);
    const double ratio = density_ratio(set, x0, r);
    out.ratios.push_back(ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

// ---------------------------------------------------------------------------
// perimeter / lower bounds
// ---------------------------------------------------------------------------

PerimeterBoundReport perimeter_bound_check(const IndicatorSet& set, double m,
                                           double lambda1, double tolerance) {
  if (set.count() == 0) throw DomainError("perimeter_bound_check: empty set");
  PerimeterBoundReport rep;
  rep.m = m;
  rep.tolerance = tolerance;
  rep.measure = measure(set);
  rep.perimeter = perimeter(set, PerimeterMode::Smoothed);
  rep.lambda1 = lambda1;
  rep.ratio1 = std::sqrt(m / 2.0) * rep.perimeter / rep.measure;
  rep.ratio1_ok = rep.ratio1 <= 1.0 + tolerance;
  if (lambda1 > 0.0) {
    rep.ratio2 = std::sqrt(m) * rep.perimeter / (lambda1 * std::sqrt(rep.measure));
    rep.ratio2_ok = rep.ratio2 <= 1.0 + tolerance;
  }
  return rep;
}

LowerBoundReport lower_bound_check(const IndicatorSet& set, double m, double lambda1) {
  LowerBoundReport rep;
  rep.m = m;
  const int dim = set.domain->dim;
  rep.measure_scaled = measure(set) * std::pow(m, -0.5 * dim);
  rep.lambda_scaled = lambda1 * std::pow(m, -2.0 / (dim + 2));
  return rep;
}

// ---------------------------------------------------------------------------
// monotonicity profiles
// ---------------------------------------------------------------------------

namespace {

// support-aware gradient of a sampled field: central differences inside the
// support, one-sided (second order where possible) at the support boundary
struct GradientField {
  std::vector<double> gx, gy, gz;
};

GradientField support_gradient(const GridDomain& d, const std::vector<double>& u) {
  GradientField g;
  const size_t n = u.size();
  g.gx.assign(n, 0.0);
  g.gy.assign(n, 0.0);
  if (d.dim == 3) g.gz.assign(n, 0.0);
  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  const double h = d.h;
  auto val = [&](int i, int j, int k, bool& in) -> double {
    if (i < 0 || i >= nx || j < 0 || j >= ny || k < 0 || k >= nz) {
      in = false;
      return 0.0;
    }
    const double v = u[size_t(d.index(i, j, k))];
    in = v > 0.0;
    return v;
  };
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (!(u[size_t(id)] > 0.0)) continue;
    int i, j, k;
    d.coords(id, i, j, k);
    for (int axis = 0; axis < d.dim; ++axis) {
      const int di = axis == 0, dj = axis == 1, dk = axis == 2;
      bool inp, inm, inp2, inm2;
      const double up = val(i + di, j + dj, k + dk, inp);
      const double um = val(i - di, j - dj, k - dk, inm);
      const double up2 = val(i + 2 * di, j + 2 * dj, k + 2 * dk, inp2);
      const double um2 = val(i - 2 * di, j - 2 * dj, k - 2 * dk, inm2);
      const double uc = u[size_t(id)];
      double der = 0.0;
      if (inp && inm) der = (up - um) / (2 * h);
      else if (inp && inp2) der = (-3 * uc + 4 * up - up2) / (2 * h);
      else if (inp) der = (up - uc) / h;
      else if (inm && inm2) der = (3 * uc - 4 * um + um2) / (2 * h);
      else if (inm) der = (uc - um) / h;
      double* comp[3] = {g.gx.data(), g.gy.data(), d.dim == 3 ? g.gz.data() : nullptr};
      comp[axis][id] = der;
    }
  }
  return g;
}

double bilinear(const GridDomain& d, const std::vector<double>& u, double px,
                double py, double pz = 0.0) {
  const double h = d.h;
  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  const double fx = px / h - 0.5, fy = py / h - 0.5;
  int i0 = std::clamp(int(std::floor(fx)), 0, nx - 2);
  int j0 = std::clamp(int(std::floor(fy)), 0, ny - 2);
  const double tx = std::clamp(fx - i0, 0.0, 1.0), ty = std::clamp(fy - j0, 0.0, 1.0);
  if (d.dim == 2) {
    auto at = [&](int i, int j) { return u[size_t(d.index(i, j, 0))]; };
    return at(i0, j0) * (1 - tx) * (1 - ty) + at(i0 + 1, j0) * tx * (1 - ty) +
           at(i0, j0 + 1) * (1 - tx) * ty + at(i0 + 1, j0 + 1) * tx * ty;
  }
  const double fz = pz / h - 0.5;
  int k0 = std::clamp(int(std::floor(fz)), 0, nz - 2);
  const double tz = std::clamp(fz - k0, 0.0, 1.0);
  auto at = [&](int i, int j, int k) { return u[size_t(d.index(i, j, k))]; };
  const double c00 = at(i0, j0, k0) * (1 - tx) + at(i0 + 1, j0, k0) * tx;
  const double c10 = at(i0, j0 + 1, k0) * (1 - tx) + at(i0 + 1, j0 + 1, k0) * tx;
  const double c01 = at(i0, j0, k0 + 1) * (1 - tx) + at(i0 + 1, j0, k0 + 1) * tx;
  const double c11 = at(i0, j0 + 1, k0 + 1) * (1 - tx) + at(i0 + 1, j0 + 1, k0 + 1) * tx;
  return (c00 * (1 - ty) + c10 * ty) * (1 - tz) + (c01 * (1 - ty) + c11 * ty) * tz;
}

// quadrature points on the sphere/circle of radius r around x0
struct ShellQuad {
  std::vector<Point> pts;
  double weight = 0.0;  // per-point surface weight
};

ShellQuad shell_points(const GridDomain& d, const Point& x0, double r) {
  ShellQuad q;
  if (d.dim == 2) {
    const int M = std::max(256, int(std::ceil(16.0 * kPi * r / d.h)));
    q.pts.reserve(size_t(M));
    for (int m = 0; m < M; ++m) {
      const double th = (m + 0.5) * 2.0 * kPi / M;
      q.pts.push_back({x0[0] + r * std::cos(th), x0[1] + r * std::sin(th), 0.0});
    }
    q.weight = 2.0 * kPi * r / M;
  } else {
    const int M = std::max(1024, int(std::ceil(64.0 * kPi * sq(r / d.h))));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    q.pts.reserve(size_t(M));
    for (int m = 0; m < M; ++m) {
      const double z = 1.0 - 2.0 * (m + 0.5) / M;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * m;
      q.pts.push_back({x0[0] + r * rho * std::cos(th), x0[1] + r * rho * std::sin(th),
                       x0[2] + r * z});
    }
    q.weight = 4.0 * kPi * r * r / M;
  }
  return q;
}

// A(r) by integration by parts; see ProfileField for the source convention.
double A_identity(const GridDomain& d, const std::vector<double>& u,
                  const ProfileField& f, const Point& x0, double r) {
  const double h = d.h;
  ShellQuad q = shell_points(d, x0, r);
  double shell_uun = 0.0, shell_u2 = 0.0;
  for (const Point& p : q.pts) {
    Point dir{(p[0] - x0[0]) / r, (p[1] - x0[1]) / r, d.dim == 3 ? (p[2] - x0[2]) / r : 0.0};
    const double uc = bilinear(d, u, p[0], p[1], p[2]);
    const double up = bilinear(d, u, p[0] + h * dir[0], p[1] + h * dir[1], p[2] + h * dir[2]);
    const double um = bilinear(d, u, p[0] - h * dir[0], p[1] - h * dir[1], p[2] - h * dir[2]);
    const double unu = (up - um) / (2 * h);
    shell_uun += uc * unu;
    shell_u2 += uc * uc;
  }
  shell_uun *= q.weight;
  shell_u2 *= q.weight;

  const double wphi_shell = d.dim == 3 ? 1.0 / r : 1.0;
  double A = wphi_shell * shell_uun;
  if (d.dim == 3) {
    A += 0.5 * shell_u2 / (r * r);
    const double u0 = bilinear(d, u, x0[0], x0[1], x0[2]);
    A -= 2.0 * kPi * u0 * u0;
  }

  if (f.source == ProfileField::Source::Harmonic) return A;
  // volume term \int phi u f, anti-aliased ball coverage
  const double cap = std::pow(0.5 * h, 2.0 - d.dim);  // weight cap at the center cell
  double vol = 0.0;
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    const double uv = u[size_t(id)];
    if (uv == 0.0) continue;
    const double dd = std::sqrt(dist2(d.center(id), x0, d.dim));
    const double w = std::clamp(0.5 + (r - dd) / h, 0.0, 1.0);
    if (w == 0.0) continue;
    double phi = 1.0;
    if (d.dim == 3) phi = dd < 0.5 * h ? cap : 1.0 / dd;
    const double fv = f.source == ProfileField::Source::Constant
                          ? f.source_value
                          : f.source_value * uv;  // Source::Eigen
    vol += phi * uv * fv * w;
  }
  return A + vol * d.cell_volume();
}

double A_direct_impl(const GridDomain& d, const std::vector<double>& u,
                     const GradientField& g, const Point& x0, double r) {
  const double h = d.h;
  const double cap = std::pow(0.5 * h, 2.0 - d.dim);
  double acc = 0.0;
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (!(u[size_t(id)] > 0.0)) continue;
    const double dd = std::sqrt(dist2(d.center(id), x0, d.dim));
    const double w = std::clamp(0.5 + (r - dd) / h, 0.0, 1.0);
    if (w == 0.0) continue;
    double q2 = sq(g.gx[size_t(id)]) + sq(g.gy[size_t(id)]);
    if (d.dim == 3) q2 += sq(g.gz[size_t(id)]);
    double phi = 1.0;
    if (d.dim == 3) phi = dd < 0.5 * h ? cap : 1.0 / dd;
    acc += q2 * phi * w;
  }
  return acc * d.cell_volume();
}

double B_shell(const GridDomain& d, const GradientField& g, const Point& x0, double r) {
  ShellQuad q = shell_points(d, x0, r);
  double acc = 0.0;
  for (const Point& p : q.pts) {
    const double gx = bilinear(d, g.gx, p[0], p[1], p[2]);
    const double gy = bilinear(d, g.gy, p[0], p[1], p[2]);
    double q2 = gx * gx + gy * gy;
    if (d.dim == 3) q2 += sq(bilinear(d, g.gz, p[0], p[1], p[2]));
    acc += q2;
  }
  return acc * q.weight;
}

}  // namespace

double profile_A_direct(const DomainPtr& domain, const std::vector<double>& u,
                        const Point& x0, double r) {
  GradientField g = support_gradient(*domain, u);
  return A_direct_impl(*domain, u, g, x0, r);
}

MonotonicityProfile monotonicity_profile(const DomainPtr& domain,
                                         const std::vector<ProfileField>& fields,
                                         const Point& x0,
                                         const std::vector<double>& radii,
                                         const ProfileOptions& opts) {
  const GridDomain& d = *domain;
  const int nf = int(fields.size());
  if (nf < 2 || nf > 3)
    throw ConfigError("monotonicity_profile: needs 2 or 3 fields");
  for (const auto& f : fields) {
    if (!f.values || int64_t(f.values->size()) != d.cell_count())
      throw ConfigError("monotonicity_profile: field size mismatch");
    for (double v : *f.values)
      if (v < 0.0) throw DomainError("monotonicity_profile: fields must be nonnegative");
  }
  // disjoint supports: pairwise product integral must vanish
  for (int a = 0; a < nf; ++a)
    for (int bq = a + 1; bq < nf; ++bq) {
      double prod = 0.0, na = 0.0, nb = 0.0;
      for (int64_t id = 0; id < d.cell_count(); ++id) {
        const double va = (*fields[size_t(a)].values)[size_t(id)];
        const double vb = (*fields[size_t(bq)].values)[size_t(id)];
        prod += va * vb;
        na += va * va;
        nb += vb * vb;
      }
      const double rel = prod / std::max(std::sqrt(na * nb), 1e-300);
      if (rel > opts.overlap_tol)
        throw DomainError("monotonicity_profile: overlapping supports (fields " +
                          std::to_string(a) + "," + std::to_string(bq) + ")");
    }

  double edge = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d.dim; ++a)
    edge = std::min({edge, x0[size_t(a)], d.extent[size_t(a)] - x0[size_t(a)]});

  MonotonicityProfile prof;
  prof.x0 = x0;
  prof.epsilon = opts.epsilon;
  prof.nfields = nf;

  std::vector<GradientField> grads;
  grads.reserve(size_t(nf));
  for (const auto& f : fields) grads.push_back(support_gradient(d, *f.values));

  auto eval_A = [&](int i, double r) -> double {
    const auto& f = fields[size_t(i)];
    if (f.source == ProfileField::Source::Unknown)
      return A_direct_impl(d, *f.values, grads[size_t(i)], x0, r);
    return A_identity(d, *f.values, f, x0, r);
  };
  // Phi_ctv uses the unweighted Dirichlet integral (identical to A in 2D)
  auto eval_ctv_factor = [&](int i, double r) -> double {
    return eval_A(i, r) / (r * r * r);
  };

  for (size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    if (r < opts.min_radius_cells * d.h || r + 2.0 * d.h > edge) {
      prof.skipped.push_back(int(ri));
      continue;
    }
    prof.radii.push_back(r);
    std::array<double, 3> A{}, b{}, B{};
    for (int i = 0; i < nf; ++i) {
      A[size_t(i)] = eval_A(i, r);
      b[size_t(i)] = A[size_t(i)] / (r * r * r * r);
      B[size_t(i)] = B_shell(d, grads[size_t(i)], x0, r);
    }
    prof.A.push_back(A);
    prof.b.push_back(b);
    prof.B.push_back(B);
    prof.phi2.push_back(A[0] * A[1] / std::pow(r, 4.0));
    if (nf == 3) {
      prof.phi3.push_back(A[0] * A[1] * A[2] / std::pow(r, 6.0 + 3.0 * opts.epsilon));
      if (d.dim == 2)
        prof.phi_ctv.push_back(eval_ctv_factor(0, r) * eval_ctv_factor(1, r) *
                               eval_ctv_factor(2, r));
    }
  }
  if (prof.radii.empty())
    throw DomainError("monotonicity_profile: no admissible radii");

  // dyadic sequence on 4^{-k} within the admissible range
  for (int k = 0; k < 16; ++k) {
    const double r = std::pow(4.0, -k);
    if (r + 2.0 * d.h > edge) continue;
    if (r < opts.min_radius_cells * d.h) break;
    std::array<double, 3> A{}, b{};
    double ds = 0.0;
    for (int i = 0; i < nf; ++i) {
      A[size_t(i)] = eval_A(i, r);
      b[size_t(i)] = std::pow(4.0, 4.0 * k) * A[size_t(i)];
      ds += 1.0 / std::sqrt(std::max(b[size_t(i)], 1e-300));
    }
    prof.dyadic_k.push_back(k);
    prof.dyadic_A.push_back(A);
    prof.dyadic_b.push_back(b);
    prof.delta.push_back(opts.delta_C * ds);
  }
  return prof;
}

std::vector<std::vector<double>> make_halfplane_fields(const DomainPtr& domain,
                                                       const Point& x0) {
  const GridDomain& d = *domain;
  std::vector<std::vector<double>> out(2, std::vector<double>(size_t(d.cell_count()), 0.0));
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (!d.in_mask(id)) continue;
    const double x = d.center(id)[0] - x0[0];
    out[0][size_t(id)] = std::max(x, 0.0);
    out[1][size_t(id)] = std::max(-x, 0.0);
  }
  return out;
}

std::vector<std::vector<double>> make_sector_fields(const DomainPtr& domain,
                                                    const Point& x0) {
  const GridDomain& d = *domain;
  if (d.dim != 2) throw ConfigError("sector preset is two-dimensional");
  std::vector<std::vector<double>> out(3, std::vector<double>(size_t(d.cell_count()), 0.0));
  const double th0 = kPi / 2.0;
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (!d.in_mask(id)) continue;
    const Point c = d.center(id);
    const double x = c[0] - x0[0], y = c[1] - x0[1];
    const double rho = std::sqrt(x * x + y * y);
    const double th = std::atan2(y, x);
    for (int i = 0; i < 3; ++i) {
      double dth = th - (th0 + 2.0 * kPi * i / 3.0);
      dth = std::remainder(dth, 2.0 * kPi);
      if (std::abs(dth) < kPi / 3.0)
        out[size_t(i)][size_t(id)] = std::pow(rho, 1.5) * std::cos(1.5 * dth);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// sphere-partition bound (2D): arcs of the unit circle
// ---------------------------------------------------------------------------

EpsilonBound epsilon_bound_2d() {
  // alpha(arc of length L) = pi/L in 2D; minimize the sum over three arcs
  auto total = [](double l1, double l2) {
    const double l3 = 2.0 * kPi - l1 - l2;
    if (l1 <= 0.0 || l2 <= 0.0 || l3 <= 0.0) return std::numeric_limits<double>::infinity();
    return kPi / l1 + kPi / l2 + kPi / l3;
  };
  double best1 = 2.0 * kPi / 3.0, best2 = 2.0 * kPi / 3.0;
  double bestv = total(best1, best2);
  // coarse grid, then shrinking local refinement
  const int N = 400;
  for (int a = 1; a < N; ++a)
    for (int bq = 1; bq < N - a; ++bq) {
      const double l1 = 2.0 * kPi * a / N, l2 = 2.0 * kPi * bq / N;
      const double v = total(l1, l2);
      if (v < bestv) {
        bestv = v;
        best1 = l1;
        best2 = l2;
      }
    }
  double step = 2.0 * kPi / N;
  for (int level = 0; level < 24; ++level) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const double v = total(best1 + di * step, best2 + dj * step);
          if (v < bestv) {
            bestv = v;
            best1 += di * step;
            best2 += dj * step;
            improved = true;
          }
        }
    }
    step *= 0.5;
  }
  EpsilonBound out;
  out.min_sum = bestv;
  out.arcs = {best1, best2, 2.0 * kPi - best1 - best2};
  out.eps_max = (2.0 * bestv - 6.0) / 3.0;
  return out;
}

// ---------------------------------------------------------------------------
// Alt-Caffarelli probe
// ---------------------------------------------------------------------------

AltCaffarelliResult alt_caffarelli_check(const DomainPtr& domain,
                                         const std::vector<double>& u,
                                         const Point& x0, double r) {
  const GridDomain& d = *domain;
  if (r < 4.0 * d.h) throw DomainError("alt_caffarelli_check: r must be >= 4h");
  double zero_meas = 0.0, mean = 0.0, rhs = 0.0;
  int64_t nshell = 0;
  GradientField g = support_gradient(d, u);
  const double rr = r * r;
  const double r2hi = sq(r + 0.5 * d.h), r2lo = sq(r - 0.5 * d.h);
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (!d.in_mask(id)) continue;
    const double dd = dist2(d.center(id), x0, d.dim);
    if (dd <= rr) {
      if (!(u[size_t(id)] > 0.0)) zero_meas += d.cell_volume();
      double q2 = sq(g.gx[size_t(id)]) + sq(g.gy[size_t(id)]);
      if (d.dim == 3) q2 += sq(g.gz[size_t(id)]);
      rhs += q2 * d.cell_volume();
    }
    if (dd >= r2lo && dd <= r2hi) {
      mean += u[size_t(id)];
      ++nshell;
    }
  }
  if (nshell == 0) throw DomainError("alt_caffarelli_check: empty shell");
  mean /= double(nshell);
  AltCaffarelliResult out;
  out.lhs = zero_meas * mean * mean / (r * r);
  out.rhs = rhs;
  out.ratio = rhs > 0.0 ? out.lhs / rhs : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// junction scan
// ---------------------------------------------------------------------------

JunctionReport junction_scan(const std::vector<IndicatorSet>& partition, double r) {
  const int h = int(partition.size());
  if (h < 1) throw ConfigError("junction_scan: empty partition");
  const GridDomain& d = *partition[0].domain;
  if (r < 2.0 * d.h) throw DomainError("junction_scan: r must be >= 2h");
  for (int a = 0; a < h; ++a)
    for (int bq = a + 1; bq < h; ++bq)
      for (size_t id = 0; id < partition[size_t(a)].support.size(); ++id)
        if (partition[size_t(a)].support[id] && partition[size_t(bq)].support[id])
          throw DomainError("junction_scan: phases are not pairwise disjoint");

  std::vector<IndicatorSet> bands;
  bands.reserve(size_t(h));
  for (const auto& p : partition) bands.push_back(boundary_cells(p));

  // ball stencil offsets
  std::vector<std::array<int, 3>> offs;
  const int R = int(std::floor(r / d.h)) + 1;
  for (int dk = d.dim == 3 ? -R : 0; dk <= (d.dim == 3 ? R : 0); ++dk)
    for (int dj = -R; dj <= R; ++dj)
      for (int di = -R; di <= R; ++di)
        if (sq(di) + sq(dj) + sq(dk) <= sq(r / d.h) + 1e-12)
          offs.push_back({di, dj, dk});

  JunctionReport rep;
  rep.r = r;
  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    bool in_band = false;
    for (int p = 0; p < h; ++p) in_band = in_band || bands[size_t(p)].support[size_t(id)];
    if (!in_band) continue;
    int i, j, k;
    d.coords(id, i, j, k);
    std::vector<int> nearby;
    bool void_present = false;
    for (const auto& o : offs) {
      const int ni = i + o[0], nj = j + o[1], nk = k + o[2];
      if (ni < 0 || ni >= nx || nj < 0 || nj >= ny || nk < 0 || nk >= nz) continue;
      const int64_t nid = d.index(ni, nj, nk);
      if (!d.in_mask(nid)) continue;
      bool covered = false;
      for (int p = 0; p < h; ++p) {
        if (bands[size_t(p)].support[size_t(nid)] &&
            std::find(nearby.begin(), nearby.end(), p) == nearby.end())
          nearby.push_back(p);
        covered = covered || partition[size_t(p)].support[size_t(nid)];
      }
      void_present = void_present || !covered;
    }
    if (int(nearby.size()) >= 3) {
      ++rep.triple_candidates;
      rep.triple_cells.push_back(id);
    } else if (int(nearby.size()) == 2) {
      if (void_present) ++rep.z2_boundary;
      else ++rep.z2_internal;
    } else {
      ++rep.z1;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// phase separation
// ---------------------------------------------------------------------------

SeparationReport separation_check(const std::vector<IndicatorSet>& partition,
                                  const std::vector<TorsionField>& torsions) {
  const int h = int(partition.size());
  if (int(torsions.size()) != h)
    throw ConfigError("separation_check: one torsion field per phase required");
  SeparationReport rep;
  std::vector<IndicatorSet> bands;
  for (const auto& p : partition) bands.push_back(boundary_cells(p));
  std::vector<double> wmax(size_t(h), 0.0);
  for (int i = 0; i < h; ++i)
    for (double v : torsions[size_t(i)].w) wmax[size_t(i)] = std::max(wmax[size_t(i)], v);

  for (int i = 0; i < h; ++i) {
    IndicatorSet ring = set_difference(dilate(partition[size_t(i)], 1), partition[size_t(i)]);
    for (int j = 0; j < h; ++j) {
      if (i == j) continue;
      SeparationPair pr;
      pr.i = i;
      pr.j = j;
      IndicatorSet dilj = dilate(partition[size_t(j)], 1);
      for (size_t id = 0; id < dilj.support.size(); ++id) {
        if (!dilj.support[id]) continue;
        if (ring.support[id]) {
          pr.bands_touch = true;
          pr.interface_max = std::max(pr.interface_max, torsions[size_t(i)].w[id]);
        }
        if (bands[size_t(i)].support[id])
          pr.own_side_max = std::max(pr.own_side_max, torsions[size_t(i)].w[id]);
      }
      if (wmax[size_t(i)] > 0.0) {
        pr.relative = pr.interface_max / wmax[size_t(i)];
        pr.own_side_relative = pr.own_side_max / wmax[size_t(i)];
      }
      rep.pairs.push_back(pr);
    }
  }

  rep.omega_outside_Di.assign(size_t(h), 0);
  for (int i = 0; i < h; ++i) {
    IndicatorSet others{partition[0].domain,
                        std::vector<uint8_t>(partition[0].support.size(), 0)};
    for (int j = 0; j < h; ++j) {
      if (j == i) continue;
      for (size_t id = 0; id < others.support.size(); ++id)
        if (partition[size_t(j)].support[id]) others.support[id] = 1;
    }
    IndicatorSet dil = dilate(others, 1);
    for (size_t id = 0; id < dil.support.size(); ++id) {
      // D_i = complement of dil; Omega_i inside D_i fails exactly on these cells
      if (partition[size_t(i)].support[id] && dil.support[id])
        ++rep.omega_outside_Di[size_t(i)];
      if (others.support[id] && !dil.support[id])
        rep.others_disjoint_from_Di = false;  // cannot happen by construction
    }
  }
  return rep;
}

LinearGrowthFit linear_growth_fit(const TorsionField& w, const IndicatorSet& set,
                                  const std::vector<double>& radii, int max_points,
                                  uint64_t seed) {
  IndicatorSet band = boundary_cells(set);
  std::vector<int64_t> pts;
  for (int64_t id = 0; id < set.domain->cell_count(); ++id)
    if (band.support[size_t(id)]) pts.push_back(id);
  if (pts.empty()) throw DomainError("linear_growth_fit: empty boundary band");
  std::mt19937_64 rng(seed);
  std::shuffle(pts.begin(), pts.end(), rng);
  if (int(pts.size()) > max_points) pts.resize(size_t(max_points));

  const GridDomain& d = *set.domain;
  LinearGrowthFit fit;
  fit.min_ratio = std::numeric_limits<double>::infinity();
  double sxy = 0.0, sxx = 0.0;
  for (int64_t id : pts) {
    const Point x0 = d.center(id);
    for (double r : radii) {
      double sup = 0.0;
      const double rr = r * r;
      for (int64_t c = 0; c < d.cell_count(); ++c) {
        if (!d.in_mask(c)) continue;
        if (dist2(d.center(c), x0, d.dim) <= rr) sup = std::max(sup, w.w[size_t(c)]);
      }
      sxy += sup * r;
      sxx += r * r;
      fit.min_ratio = std::min(fit.min_ratio, sup / r);
      ++fit.points;
    }
  }
  fit.c_fit = sxy / sxx;
  return fit;
}

}  // namespace spshape
