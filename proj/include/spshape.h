/* spshape - multiphase spectral shape optimization on Cartesian grids.
 *
 * C interface to the core library: opaque handles, status codes, and the
 * config-driven run entry points the CLI is built on. All functions are
 * thread-compatible: distinct handles may be used from distinct threads;
 * a single handle must not be mutated concurrently (handles are immutable
 * after creation, so sharing read-only is fine).
 */
#ifndef SPSHAPE_H
#define SPSHAPE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SPS_OK = 0,
  SPS_ERR_INTERNAL = 1,
  SPS_ERR_CONFIG = 2,  /* bad configuration or input artifacts */
  SPS_ERR_SOLVER = 3,  /* linear/eigen solver failure */
  SPS_ERR_INVALID = 4  /* null handle or argument out of contract */
} sps_status;

typedef struct sps_domain sps_domain; /* uniform Cartesian grid with cell mask */
typedef struct sps_field sps_field;   /* per-cell double field on a domain */
typedef struct sps_set sps_set;       /* indicator set of cells */

const char* sps_version(void);
/* message of the last failing call on this thread; empty string if none */
const char* sps_last_error(void);

/* ------------------------------------------------------------------ domain */

/* extent: dim doubles; cells: dim ints; mask: cell_count bytes or NULL for
 * the full box. Row-major cell order, x fastest. */
sps_status sps_domain_create(int dim, const double* extent, const int* cells,
                             const uint8_t* mask, sps_domain** out);
void sps_domain_free(sps_domain* d);
int sps_domain_dim(const sps_domain* d);
double sps_domain_spacing(const sps_domain* d);
int64_t sps_domain_cell_count(const sps_domain* d);
double sps_domain_measure(const sps_domain* d);

/* ------------------------------------------------------------------ fields */

/* values: cell_count doubles, or NULL for zeros */
sps_status sps_field_create(const sps_domain* d, const double* values, sps_field** out);
void sps_field_free(sps_field* f);
int64_t sps_field_size(const sps_field* f);
sps_status sps_field_copy_data(const sps_field* f, double* out);

/* --------------------------------------------------------------------- sets */

sps_status sps_set_full(const sps_domain* d, sps_set** out);
sps_status sps_set_disk(const sps_domain* d, const double* center, double r, sps_set** out);
sps_status sps_set_rect(const sps_domain* d, const double* lo, const double* hi, sps_set** out);
sps_status sps_set_from_field(const sps_field* f, double threshold, sps_set** out);
void sps_set_free(sps_set* s);
int64_t sps_set_cell_count(const sps_set* s);
double sps_set_measure(const sps_set* s);
/* mode: 0 = face count, 1 = smoothed (Gaussian, sigma = 2h) */
sps_status sps_set_perimeter(const sps_set* s, int mode, double* out);
sps_status sps_set_density_ratio(const sps_set* s, const double* x0, double r, double* out);

/* ---------------------------------------------------------------------- pde */

/* exact Dirichlet torsion solve -Delta w = 1 on the support */
sps_status sps_solve_torsion(const sps_set* support, sps_field** w_out, double* energy_out);
/* fictitious-domain solve with reaction mu*(1-phi) */
sps_status sps_solve_torsion_penalized(const sps_field* phi, double mu, sps_field** w_out,
                                       double* energy_out);
sps_status sps_gamma_distance(const sps_field* w1, const sps_field* w2, double* out);

/* k smallest Dirichlet eigenvalues (1 <= k <= 20). lambdas_out: k doubles.
 * u_out: NULL, or an array of k field handle slots to receive eigenfunctions
 * (caller frees each). */
sps_status sps_eigs(const sps_set* support, int k, double* lambdas_out, sps_field** u_out);
sps_status sps_eigs_penalized(const sps_field* phi, double mu, int k, double* lambdas_out,
                              sps_field** u_out);

/* ---------------------------------------------------------------- run layer */

/* subcommand: "solve" | "optimize" | "verify" | "monotonicity".
 * config_path: JSON run configuration (see README for the schema).
 * outdir: overrides the config's output_dir when non-NULL.
 * Returns the CLI exit code: 0 ok, 2 config/input error, 3 solver failure. */
int sps_run(const char* subcommand, const char* config_path, const char* outdir);

#ifdef __cplusplus
}
#endif

#endif /* SPSHAPE_H */
