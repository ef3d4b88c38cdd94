#pragma once

#include <functional>

#include "shapefn.hpp"

namespace spshape {

struct OptimizerConfig {
  int max_iters = 150;             // per mu stage
  double step0 = 0.0;              // 0 -> 1/(mu*h^dim) heuristic
  double backtrack = 0.5;
  double armijo_c = 1e-4;
  int max_halvings = 30;
  std::vector<double> mu_schedule = {1e3, 1e4, 1e5};
  double stop_tol = 1e-5;          // on relative objective decrease
  int stop_patience = 3;
  uint64_t seed = 1;
  enum class Init { Random, Voronoi, Given };
  Init init = Init::Voronoi;
  std::vector<PhaseField> init_phases;  // used when init == Given
  double binarize_threshold = 0.5;
  EvalOptions eval;

  void validate() const;
};

struct TraceRow {
  int stage = 0;
  double mu = 0.0;
  int iter = 0;
  double objective = 0.0;
  std::vector<double> F;
  std::vector<double> measures;
  double step = 0.0;
  int halvings = 0;
};

struct OptimizationResult {
  std::vector<PhaseField> densities;
  std::vector<IndicatorSet> supports;       // binarized at the threshold
  std::vector<TraceRow> trace;
  ObjectiveValue penalized;                  // final stage, density objective
  ObjectiveValue exact;                      // exact Dirichlet re-evaluation
  bool exact_valid = false;
  bool stalled = false;
  int degeneracy_warnings = 0;
  int line_search_failures = 0;
};

// Per-cell Euclidean projection onto { y >= 0, sum_i y_i <= 1 }. The sort
// based simplex projection runs only where the clamped values sum above 1.
void project_constraint(std::vector<PhaseField>& stack);

// phi_i >= threshold wins the cell, ties broken by lowest phase_id. Inputs
// must be projected stacks; overlapping winners mean the precondition is
// violated and raise DomainError.
std::vector<IndicatorSet> binarize(const std::vector<PhaseField>& phases,
                                   double threshold);

using IterationCallback = std::function<void(const TraceRow&, const std::vector<PhaseField>&)>;

OptimizationResult run(const ObjectiveSpec& objective, const DomainPtr& domain,
                       const OptimizerConfig& config,
                       const IterationCallback& on_stage_end = nullptr);

}  // namespace spshape
