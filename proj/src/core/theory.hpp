#pragma once

#include "shapefn.hpp"

namespace spshape {

// ---------------------------------------------------------------------------
// subsolution test: E(Omega) + m|Omega| <= E(Omega~) + m|Omega~| against inner
// perturbations, with the gamma-distance bookkeeping 2m|Omega \ Omega~| <= d_gamma.
// ---------------------------------------------------------------------------

struct PerturbationRecord {
  std::string kind;       // "ball" or "erosion"
  Point center{};         // ball removals
  double radius = 0.0;
  double delta_E = 0.0;   // E(Omega~) - E(Omega) >= 0
  double delta_meas = 0.0;  // |Omega| - |Omega~| >= 0
  double margin = 0.0;    // delta_E - m * delta_meas
  double d_gamma = 0.0;
  double ratio = 0.0;     // 2 m delta_meas / d_gamma (0 when d_gamma = 0)
  bool trivial = false;   // Omega~ == Omega
  bool skipped = false;   // perturbation emptied the set
  bool pass = false;
  // optional lambda_1 probe for the gamma-Lip constant
  double delta_lambda1 = 0.0;
  double glip_ratio = 0.0;  // |delta lambda_1| / d_gamma
};

struct SubsolutionOptions {
  int count = 20;
  uint64_t seed = 7;
  double ball_fraction = 0.7;    // rest are randomized one-step erosions
  double slack = 0.0;            // margin >= -slack passes
  bool lambda_probe = false;     // also solve lambda_1 on Omega and Omega~
  CgOptions cg;
  EigsOptions eigs;
};

struct SubsolutionReport {
  double m = 0.0;
  double E = 0.0;          // E(Omega)
  double meas = 0.0;       // |Omega|
  double lambda1 = 0.0;    // only with lambda_probe
  std::vector<PerturbationRecord> records;
  int valid = 0;
  int passed = 0;
  double pass_fraction = 0.0;
  double glip_max = 0.0;   // empirical gamma-Lip constant of lambda_1
};

SubsolutionReport subsolution_test(const IndicatorSet& set, double m,
                                   const SubsolutionOptions& opts = {});

// ---------------------------------------------------------------------------
// growth / density profiles around a point
// ---------------------------------------------------------------------------

struct GrowthRow {
  double r = 0.0;
  double sup = 0.0;        // max of w over the ball cells
  double shell_mean = 0.0; // area-normalized mean over the width-h shell
  bool skipped = false;    // empty shell
};

std::vector<GrowthRow> growth_profile(const TorsionField& w, const Point& x0,
                                      const std::vector<double>& radii);

struct DensityProfileResult {
  std::vector<double> radii;
  std::vector<double> ratios;
  double max_ratio = 0.0;
};

DensityProfileResult density_profile(const IndicatorSet& set, const Point& x0,
                                     const std::vector<double>& radii);

// ---------------------------------------------------------------------------
// perimeter / lower bounds
// ---------------------------------------------------------------------------

struct PerimeterBoundReport {
  double m = 0.0;
  double measure = 0.0;
  double perimeter = 0.0;  // smoothed mode
  double lambda1 = 0.0;    // 0 when not supplied
  double ratio1 = 0.0;     // sqrt(m/2) P / |Omega|        (energy subsolutions)
  double ratio2 = 0.0;     // sqrt(m) P / (lambda1 |Omega|^{1/2})  (lambda_1 subsolutions)
  bool ratio1_ok = false;  // <= 1 + tolerance
  bool ratio2_ok = false;
  double tolerance = 0.15;
};

PerimeterBoundReport perimeter_bound_check(const IndicatorSet& set, double m,
                                           double lambda1 = 0.0,
                                           double tolerance = 0.15);

struct LowerBoundReport {
  double m = 0.0;
  double measure_scaled = 0.0;  // |Omega| * m^{-d/2}
  double lambda_scaled = 0.0;   // lambda_1 * m^{-2/(d+2)}
};

LowerBoundReport lower_bound_check(const IndicatorSet& set, double m, double lambda1);

// ---------------------------------------------------------------------------
// monotonicity profiles (CJK two-phase, three-phase, CTV)
// ---------------------------------------------------------------------------

// A field enters the profile with its source term f = -Laplace(u) declared,
// which the A_i quadrature integrates by parts:
//   A(r) = \oint_{dB_r} u u_nu + \int_{B_r} u f   (2D; weighted version in 3D)
// Unknown sources fall back to the direct central-difference quadrature.
struct ProfileField {
  const std::vector<double>* values = nullptr;
  enum class Source { Harmonic, Constant, Eigen, Unknown };
  Source source = Source::Unknown;
  double source_value = 0.0;  // the constant, or lambda for Source::Eigen
};

struct MonotonicityProfile {
  Point x0{};
  double epsilon = 0.5;
  std::vector<double> radii;
  std::vector<std::array<double, 3>> A;   // A_i(r)
  std::vector<std::array<double, 3>> b;   // r^{-4} A_i(r)
  std::vector<std::array<double, 3>> B;   // shell integral of |grad u_i|^2
  std::vector<double> phi2;               // r^{-4} A_1 A_2 (two or more fields)
  std::vector<double> phi3;               // r^{-(6+3eps)} A_1 A_2 A_3
  std::vector<double> phi_ctv;            // prod_i r^{-3} \int_{B_r} |grad u_i|^2, 2D
  std::vector<int> skipped;               // radii dropped (too close to the box edge)
  // dyadic bookkeeping: A_i^k = A_i(4^{-k}), b_i^k = 4^{4k} A_i^k,
  // delta_k = C sum_i b_i^k^{-1/2}
  std::vector<int> dyadic_k;
  std::vector<std::array<double, 3>> dyadic_A;
  std::vector<std::array<double, 3>> dyadic_b;
  std::vector<double> delta;
  int nfields = 0;
};

struct ProfileOptions {
  double epsilon = 0.5;
  double delta_C = 1.0;          // the constant in delta_k (empirical bookkeeping)
  double overlap_tol = 1e-12;    // on h^d sum u_i u_j
  int min_radius_cells = 4;
};

MonotonicityProfile monotonicity_profile(const DomainPtr& domain,
                                         const std::vector<ProfileField>& fields,
                                         const Point& x0,
                                         const std::vector<double>& radii,
                                         const ProfileOptions& opts = {});

// Direct quadrature of A(r) (support-aware central differences, anti-aliased
// ball weights); the fallback path and the monotone-in-r reference.
double profile_A_direct(const DomainPtr& domain, const std::vector<double>& u,
                        const Point& x0, double r);

// analytic presets on a given domain, centered at x0 (detached from any PDE)
std::vector<std::vector<double>> make_halfplane_fields(const DomainPtr& domain,
                                                       const Point& x0);
std::vector<std::vector<double>> make_sector_fields(const DomainPtr& domain,
                                                    const Point& x0);

// ---------------------------------------------------------------------------
// sphere-partition bound for the three-phase exponent (2D)
// ---------------------------------------------------------------------------

struct EpsilonBound {
  double eps_max = 0.0;        // (2 min_sum - 6) / 3
  double min_sum = 0.0;        // min of alpha_1+alpha_2+alpha_3 over arc partitions
  std::array<double, 3> arcs{};  // the minimizing arc lengths
};

EpsilonBound epsilon_bound_2d();

// ---------------------------------------------------------------------------
// Alt-Caffarelli inequality probe
// ---------------------------------------------------------------------------

struct AltCaffarelliResult {
  double lhs = 0.0;   // (1/r^2) |{u=0} cap B_r| (shell mean of u)^2
  double rhs = 0.0;   // \int_{B_r} |grad u|^2 (no dimensional constant)
  double ratio = 0.0;
};

AltCaffarelliResult alt_caffarelli_check(const DomainPtr& domain,
                                         const std::vector<double>& u,
                                         const Point& x0, double r);

// ---------------------------------------------------------------------------
// junction scan and phase separation
// ---------------------------------------------------------------------------

struct JunctionReport {
  double r = 0.0;
  int z1 = 0;            // simple points
  int z2_internal = 0;   // two bands, no void in B_r
  int z2_boundary = 0;   // two bands with void present
  int triple_candidates = 0;
  std::vector<int64_t> triple_cells;  // flat cell ids
};

JunctionReport junction_scan(const std::vector<IndicatorSet>& partition, double r);

struct SeparationPair {
  int i = 0, j = 0;
  // w_i on the complement-side face ring of Omega_i where Omega_j abuts;
  // identically zero for exact Dirichlet solves (Lemma 4.1's discrete form)
  double interface_max = 0.0;
  double relative = 0.0;        // interface_max / max w_i
  // w_i on its own boundary band within one cell of Omega_j (diagnostic:
  // how fast w_i approaches zero at the common boundary)
  double own_side_max = 0.0;
  double own_side_relative = 0.0;
  bool bands_touch = false;
};

struct SeparationReport {
  std::vector<SeparationPair> pairs;
  // D_i = complement of the 1-cell dilation of the union of the other phases
  std::vector<int64_t> omega_outside_Di;  // cells of Omega_i not in D_i
  bool others_disjoint_from_Di = true;    // Omega_j cap D_i = empty for all j != i
};

SeparationReport separation_check(const std::vector<IndicatorSet>& partition,
                                  const std::vector<TorsionField>& torsions);

// least-squares fit through the origin of sup_{B_r(x0)} w against r over
// boundary-band points (Lemma 3.6 contrapositive probe)
struct LinearGrowthFit {
  double c_fit = 0.0;      // fitted slope
  double min_ratio = 0.0;  // worst sup/r seen
  int points = 0;
};

LinearGrowthFit linear_growth_fit(const TorsionField& w, const IndicatorSet& set,
                                  const std::vector<double>& radii,
                                  int max_points = 64, uint64_t seed = 11);

}  // namespace spshape
