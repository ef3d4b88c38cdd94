#include "shapefn.hpp"

#include <algorithm>
#include <cmath>

namespace spshape {

void ObjectiveSpec::validate() const {
  if (functionals.empty()) throw ConfigError("objective: needs at least one phase");
  if (!(m >= 0.0)) throw ConfigError("objective: m must be >= 0");
  for (const auto& f : functionals)
    if (f.kind == FunctionalSpec::Kind::Eigenvalue && f.k < 1)
      throw ConfigError("objective: eigenvalue index k must be >= 1");
  if (g == Aggregator::WeightedSum) {
    if (weights.size() != functionals.size())
      throw ConfigError("objective: weighted_sum needs one weight per phase");
    for (double w : weights)
      if (!(w > 0.0)) throw ConfigError("objective: weights must be > 0");
  }
}

double ObjectiveSpec::aggregate(const std::vector<double>& F) const {
  switch (g) {
    case Aggregator::Sum: {
      double s = 0.0;
      for (double v : F) s += v;
      return s;
    }
    case Aggregator::Max:
      return *std::max_element(F.begin(), F.end());
    case Aggregator::WeightedSum: {
      double s = 0.0;
      for (size_t i = 0; i < F.size(); ++i) s += weights[i] * F[i];
      return s;
    }
  }
  return 0.0;
}

namespace {

FunctionalEval eval_on_operator(const FunctionalSpec& spec, const LaplaceOperator& op,
                                const EvalOptions& opts, EigsWorkspace* ws) {
  FunctionalEval out;
  if (spec.kind == FunctionalSpec::Kind::TorsionEnergy) {
    out.torsion = solve_torsion(op, opts.cg);
    out.value = torsion_energy(*out.torsion);
    return out;
  }
  // solve one extra pair to measure the spectral gap at k
  const int ksolve = int(std::min<int64_t>(op.ndof(), spec.k + 1));
  EigsWorkspace local;
  EigsWorkspace& w = ws ? *ws : local;
  auto pairs = w.solve(op, ksolve, opts.eigs);
  out.eig = pairs[size_t(spec.k - 1)];
  out.value = out.eig->lambda;
  double gap = std::numeric_limits<double>::infinity();
  if (spec.k > 1)
    gap = std::min(gap, (pairs[size_t(spec.k - 1)].lambda - pairs[size_t(spec.k - 2)].lambda));
  if (ksolve > spec.k)
    gap = std::min(gap, (pairs[size_t(spec.k)].lambda - pairs[size_t(spec.k - 1)].lambda));
  out.gap = gap / std::max(std::abs(out.value), 1e-300);
  out.degenerate_gap = out.gap < opts.gap_tol;
  return out;
}

}  // namespace

FunctionalEval eval_functional(const FunctionalSpec& spec, const PhaseField& phi,
                               double mu, const EvalOptions& opts, EigsWorkspace* ws) {
  double mass = 0.0;
  for (double v : phi.values) mass += v;
  if (mass <= 0.0)
    throw DomainError("eval_functional: phase " + std::to_string(phi.phase_id) +
                      " is identically zero (degenerate)");
  LaplaceOperator op = assemble_penalized(phi, mu);
  return eval_on_operator(spec, op, opts, ws);
}

FunctionalEval eval_functional_exact(const FunctionalSpec& spec,
                                     const IndicatorSet& support,
                                     const EvalOptions& opts) {
  if (support.count() == 0)
    throw DomainError("eval_functional_exact: empty support (degenerate phase)");
  LaplaceOperator op = assemble_exact(support);
  return eval_on_operator(spec, op, opts, nullptr);
}

ObjectiveValue eval_objective(const ObjectiveSpec& spec,
                              const std::vector<PhaseField>& phases, double mu,
                              const EvalOptions& opts,
                              std::vector<EigsWorkspace>* wss,
                              std::vector<FunctionalEval>* evals_out) {
  spec.validate();
  if (int(phases.size()) != spec.phase_count())
    throw ConfigError("eval_objective: phase count mismatch");
  ObjectiveValue out;
  out.F.resize(phases.size());
  out.measures.resize(phases.size());
  if (evals_out) evals_out->resize(phases.size());
  for (size_t i = 0; i < phases.size(); ++i) {
    EigsWorkspace* ws = wss ? &(*wss)[i] : nullptr;
    FunctionalEval ev = eval_functional(spec.functionals[i], phases[i], mu, opts, ws);
    out.F[i] = ev.value;
    out.measures[i] = measure_density(phases[i]);
    if (evals_out) (*evals_out)[i] = std::move(ev);
  }
  out.g = spec.aggregate(out.F);
  double msum = 0.0;
  for (double v : out.measures) msum += v;
  out.total = out.g + spec.m * msum;
  return out;
}

std::vector<double> shape_gradient(const FunctionalSpec& spec, const PhaseField& phi,
                                   const FunctionalEval& cached, double mu) {
  const double hv = phi.domain->cell_volume();
  std::vector<double> g(phi.values.size(), 0.0);
  if (spec.kind == FunctionalSpec::Kind::Eigenvalue) {
    if (!cached.eig) throw ConfigError("shape_gradient: missing cached eigenpair");
    const auto& u = cached.eig->u;
    for (size_t id = 0; id < g.size(); ++id)
      if (phi.domain->mask[id]) g[id] = -mu * u[id] * u[id] * hv;
  } else {
    if (!cached.torsion) throw ConfigError("shape_gradient: missing cached torsion field");
    const auto& w = cached.torsion->w;
    for (size_t id = 0; id < g.size(); ++id)
      if (phi.domain->mask[id]) g[id] = -0.5 * mu * w[id] * w[id] * hv;
  }
  return g;
}

std::vector<std::vector<double>> objective_gradient(
    const ObjectiveSpec& spec, const std::vector<PhaseField>& phases, double mu,
    const std::vector<FunctionalEval>& evals) {
  const size_t h = phases.size();
  std::vector<double> gw(h, 0.0);  // aggregator weight per phase
  switch (spec.g) {
    case ObjectiveSpec::Aggregator::Sum:
      std::fill(gw.begin(), gw.end(), 1.0);
      break;
    case ObjectiveSpec::Aggregator::WeightedSum:
      gw = spec.weights;
      break;
    case ObjectiveSpec::Aggregator::Max: {
      double fmax = -std::numeric_limits<double>::infinity();
      for (const auto& ev : evals) fmax = std::max(fmax, ev.value);
      std::vector<size_t> ties;
      for (size_t i = 0; i < h; ++i)
        if (std::abs(evals[i].value - fmax) <= 1e-12 * std::max(1.0, std::abs(fmax)))
          ties.push_back(i);
      for (size_t i : ties) gw[i] = 1.0 / double(ties.size());
      break;
    }
  }
  const double hv = phases[0].domain->cell_volume();
  std::vector<std::vector<double>> out(h);
  for (size_t i = 0; i < h; ++i) {
    out[i] = shape_gradient(spec.functionals[i], phases[i], evals[i], mu);
    for (size_t id = 0; id < out[i].size(); ++id) {
      out[i][id] *= gw[i];
      if (phases[i].domain->mask[id]) out[i][id] += spec.m * hv;
    }
  }
  return out;
}

}  // namespace spshape
