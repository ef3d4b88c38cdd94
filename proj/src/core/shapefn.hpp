#pragma once

#include <optional>

#include "pde.hpp"

namespace spshape {

struct FunctionalSpec {
  enum class Kind { Eigenvalue, TorsionEnergy };
  Kind kind = Kind::Eigenvalue;
  int k = 1;  // eigenvalue index when kind == Eigenvalue
};

struct ObjectiveSpec {
  enum class Aggregator { Sum, Max, WeightedSum };
  Aggregator g = Aggregator::Sum;
  std::vector<FunctionalSpec> functionals;  // one per phase
  std::vector<double> weights;              // used by WeightedSum
  double m = 0.0;                           // measure penalty

  int phase_count() const { return int(functionals.size()); }
  void validate() const;
  double aggregate(const std::vector<double>& F) const;
};

// Value of one F_i with the state needed by shape_gradient.
struct FunctionalEval {
  double value = 0.0;
  std::optional<EigenPair> eig;          // the k-th pair
  std::optional<TorsionField> torsion;
  bool degenerate_gap = false;
  double gap = std::numeric_limits<double>::infinity();  // relative spectral gap at k
};

struct ObjectiveValue {
  std::vector<double> F;
  std::vector<double> measures;
  double g = 0.0;
  double total = 0.0;  // g + m * sum(measures)
};

struct EvalOptions {
  EigsOptions eigs;
  CgOptions cg;
  double gap_tol = 1e-6;
};

FunctionalEval eval_functional(const FunctionalSpec& spec, const PhaseField& phi,
                               double mu, const EvalOptions& opts = {},
                               EigsWorkspace* ws = nullptr);

// Exact-mode evaluation on a binarized support (used for re-evaluation after
// the optimizer binarizes).
FunctionalEval eval_functional_exact(const FunctionalSpec& spec,
                                     const IndicatorSet& support,
                                     const EvalOptions& opts = {});

ObjectiveValue eval_objective(const ObjectiveSpec& spec,
                              const std::vector<PhaseField>& phases, double mu,
                              const EvalOptions& opts = {},
                              std::vector<EigsWorkspace>* wss = nullptr,
                              std::vector<FunctionalEval>* evals_out = nullptr);

// d F / d phi_j for one phase as a full cell field:
//   eigenvalue(k): -mu * u_k(x_j)^2 * h^dim
//   torsion_energy: -1/2 * mu * w(x_j)^2 * h^dim
std::vector<double> shape_gradient(const FunctionalSpec& spec, const PhaseField& phi,
                                   const FunctionalEval& cached, double mu);

// Gradient of the full objective for every phase (aggregator weights and the
// m*h^dim measure term included). Ties of g=max are averaged.
std::vector<std::vector<double>> objective_gradient(
    const ObjectiveSpec& spec, const std::vector<PhaseField>& phases, double mu,
    const std::vector<FunctionalEval>& evals);

}  // namespace spshape
