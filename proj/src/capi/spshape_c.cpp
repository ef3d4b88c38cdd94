#include "spshape.h"

#include <cstring>
#include <string>

#include "../core/run.hpp"
#include "../core/theory.hpp"

using namespace spshape;

namespace {

thread_local std::string g_last_error;

sps_status set_error(const std::string& msg, sps_status st) {
  g_last_error = msg;
  return st;
}

template <typename F>
sps_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SPS_OK;
  } catch (const ConfigError& e) {
    return set_error(e.what(), SPS_ERR_CONFIG);
  } catch (const DomainError& e) {
    return set_error(e.what(), SPS_ERR_CONFIG);
  } catch (const SolverError& e) {
    return set_error(e.what(), SPS_ERR_SOLVER);
  } catch (const std::exception& e) {
    return set_error(e.what(), SPS_ERR_INTERNAL);
  }
}

}  // namespace

struct sps_domain {
  DomainPtr d;
};
struct sps_field {
  DomainPtr d;
  std::vector<double> values;
};
struct sps_set {
  IndicatorSet s;
};

extern "C" {

const char* sps_version(void) { return "1.0.0"; }

const char* sps_last_error(void) { return g_last_error.c_str(); }

sps_status sps_domain_create(int dim, const double* extent, const int* cells,
                             const uint8_t* mask, sps_domain** out) {
  if (!extent || !cells || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    std::array<double, 3> e{extent[0], extent[1], dim == 3 ? extent[2] : 0.0};
    std::array<int, 3> c{cells[0], cells[1], dim == 3 ? cells[2] : 1};
    DomainPtr d = build_domain(dim, e, c);
    if (mask) {
      auto md = std::make_shared<GridDomain>(*d);
      md->mask.assign(mask, mask + md->cell_count());
      d = md;
    }
    *out = new sps_domain{d};
  });
}

void sps_domain_free(sps_domain* d) { delete d; }

int sps_domain_dim(const sps_domain* d) { return d ? d->d->dim : 0; }

double sps_domain_spacing(const sps_domain* d) { return d ? d->d->h : 0.0; }

int64_t sps_domain_cell_count(const sps_domain* d) { return d ? d->d->cell_count() : 0; }

double sps_domain_measure(const sps_domain* d) { return d ? d->d->total_measure() : 0.0; }

sps_status sps_field_create(const sps_domain* d, const double* values, sps_field** out) {
  if (!d || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    auto* f = new sps_field{d->d, std::vector<double>(size_t(d->d->cell_count()), 0.0)};
    if (values) std::memcpy(f->values.data(), values, f->values.size() * sizeof(double));
    *out = f;
  });
}

void sps_field_free(sps_field* f) { delete f; }

int64_t sps_field_size(const sps_field* f) { return f ? int64_t(f->values.size()) : 0; }

sps_status sps_field_copy_data(const sps_field* f, double* out) {
  if (!f || !out) return set_error("null argument", SPS_ERR_INVALID);
  std::memcpy(out, f->values.data(), f->values.size() * sizeof(double));
  return SPS_OK;
}

sps_status sps_set_full(const sps_domain* d, sps_set** out) {
  if (!d || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    IndicatorSet s{d->d, std::vector<uint8_t>(d->d->mask.begin(), d->d->mask.end())};
    *out = new sps_set{std::move(s)};
  });
}

sps_status sps_set_disk(const sps_domain* d, const double* center, double r, sps_set** out) {
  if (!d || !center || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    Point c{center[0], center[1], d->d->dim == 3 ? center[2] : 0.0};
    *out = new sps_set{ball_cells(d->d, c, r)};
  });
}

sps_status sps_set_rect(const sps_domain* d, const double* lo, const double* hi,
                        sps_set** out) {
  if (!d || !lo || !hi || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    const GridDomain& dom = *d->d;
    IndicatorSet s{d->d, std::vector<uint8_t>(size_t(dom.cell_count()), 0)};
    for (int64_t id = 0; id < dom.cell_count(); ++id) {
      if (!dom.in_mask(id)) continue;
      const Point p = dom.center(id);
      bool in = true;
      for (int a = 0; a < dom.dim; ++a)
        if (p[size_t(a)] < lo[a] || p[size_t(a)] > hi[a]) in = false;
      s.support[size_t(id)] = in;
    }
    *out = new sps_set{std::move(s)};
  });
}

sps_status sps_set_from_field(const sps_field* f, double threshold, sps_set** out) {
  if (!f || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    PhaseField phi{f->d, f->values, 0};
    IndicatorSet s = binarize_field(phi, threshold);
    for (size_t id = 0; id < s.support.size(); ++id)
      if (!f->d->mask[id]) s.support[id] = 0;
    *out = new sps_set{std::move(s)};
  });
}

void sps_set_free(sps_set* s) { delete s; }

int64_t sps_set_cell_count(const sps_set* s) { return s ? s->s.count() : 0; }

double sps_set_measure(const sps_set* s) { return s ? measure(s->s) : 0.0; }

sps_status sps_set_perimeter(const sps_set* s, int mode, double* out) {
  if (!s || !out) return set_error("null argument", SPS_ERR_INVALID);
  if (mode != 0 && mode != 1) return set_error("perimeter mode must be 0 or 1", SPS_ERR_INVALID);
  return guarded([&] {
    *out = perimeter(s->s, mode == 0 ? PerimeterMode::FaceCount : PerimeterMode::Smoothed);
  });
}

sps_status sps_set_density_ratio(const sps_set* s, const double* x0, double r, double* out) {
  if (!s || !x0 || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    Point p{x0[0], x0[1], s->s.domain->dim == 3 ? x0[2] : 0.0};
    *out = density_ratio(s->s, p, r);
  });
}

sps_status sps_solve_torsion(const sps_set* support, sps_field** w_out, double* energy_out) {
  if (!support || !w_out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    LaplaceOperator op = assemble_exact(support->s);
    TorsionField w = solve_torsion(op);
    if (energy_out) *energy_out = torsion_energy(w);
    *w_out = new sps_field{support->s.domain, std::move(w.w)};
  });
}

sps_status sps_solve_torsion_penalized(const sps_field* phi, double mu, sps_field** w_out,
                                       double* energy_out) {
  if (!phi || !w_out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    PhaseField p{phi->d, phi->values, 0};
    LaplaceOperator op = assemble_penalized(p, mu);
    TorsionField w = solve_torsion(op);
    if (energy_out) *energy_out = torsion_energy(w);
    *w_out = new sps_field{phi->d, std::move(w.w)};
  });
}

sps_status sps_gamma_distance(const sps_field* w1, const sps_field* w2, double* out) {
  if (!w1 || !w2 || !out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    TorsionField a{w1->d, w1->values, 0, BoundaryMode::Exact, 0.0, 0, 0.0};
    TorsionField b{w2->d, w2->values, 0, BoundaryMode::Exact, 0.0, 0, 0.0};
    *out = gamma_distance(a, b);
  });
}

namespace {

sps_status eigs_common(const LaplaceOperator& op, const DomainPtr& dom, int k,
                       double* lambdas_out, sps_field** u_out) {
  auto pairs = eigs_smallest(op, k);
  for (int i = 0; i < k; ++i) {
    lambdas_out[i] = pairs[size_t(i)].lambda;
    if (u_out) u_out[i] = new sps_field{dom, std::move(pairs[size_t(i)].u)};
  }
  return SPS_OK;
}

}  // namespace

sps_status sps_eigs(const sps_set* support, int k, double* lambdas_out, sps_field** u_out) {
  if (!support || !lambdas_out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    LaplaceOperator op = assemble_exact(support->s);
    eigs_common(op, support->s.domain, k, lambdas_out, u_out);
  });
}

sps_status sps_eigs_penalized(const sps_field* phi, double mu, int k, double* lambdas_out,
                              sps_field** u_out) {
  if (!phi || !lambdas_out) return set_error("null argument", SPS_ERR_INVALID);
  return guarded([&] {
    PhaseField p{phi->d, phi->values, 0};
    LaplaceOperator op = assemble_penalized(p, mu);
    eigs_common(op, phi->d, k, lambdas_out, u_out);
  });
}

int sps_run(const char* subcommand, const char* config_path, const char* outdir) {
  if (!subcommand || !config_path) {
    set_error("null argument", SPS_ERR_INVALID);
    return SPS_ERR_INVALID;
  }
  std::string err;
  const int code = run_subcommand(subcommand, config_path, outdir ? outdir : "", &err);
  g_last_error = err;
  return code;
}

}  // extern "C"
