#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace spshape {

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw ConfigError("optimizer.max_iters must be >= 1");
  if (step0 < 0.0) throw ConfigError("optimizer.step0 must be >= 0");
  if (!(backtrack > 0.0 && backtrack < 1.0))
    throw ConfigError("optimizer.backtrack must lie in (0,1)");
  if (!(stop_tol > 0.0)) throw ConfigError("optimizer.stop_tol must be > 0");
  if (mu_schedule.empty()) throw ConfigError("optimizer.mu_schedule must be nonempty");
  for (size_t i = 1; i < mu_schedule.size(); ++i)
    if (!(mu_schedule[i] > mu_schedule[i - 1]))
      throw ConfigError("optimizer.mu_schedule must be strictly increasing");
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0))
    throw ConfigError("optimizer.binarize_threshold must lie in (0,1)");
}

namespace {

void project_cell(double* y, int h) {
  double spos = 0.0;
  for (int i = 0; i < h; ++i) spos += std::max(y[i], 0.0);
  if (spos <= 1.0) {
    for (int i = 0; i < h; ++i) y[i] = std::max(y[i], 0.0);
    return;
  }
  // keep the subtraction below well-conditioned for wild inputs
  for (int i = 0; i < h; ++i) y[i] = std::clamp(y[i], -1e6, 1e6);
  // sort-based projection onto the simplex { y >= 0, sum = 1 }
  std::array<double, 16> buf;
  std::vector<double> dyn;
  double* s = nullptr;
  if (h <= 16) {
    std::copy(y, y + h, buf.begin());
    s = buf.data();
  } else {
    dyn.assign(y, y + h);
    s = dyn.data();
  }
  std::sort(s, s + h, std::greater<double>());
  double cum = 0.0, theta = 0.0;
  int rho = 0;
  for (int j = 0; j < h; ++j) {
    cum += s[j];
    const double t = (cum - 1.0) / double(j + 1);
    if (s[j] - t > 0.0) {
      rho = j + 1;
      theta = t;
    }
  }
  (void)rho;
  double total = 0.0;
  for (int i = 0; i < h; ++i) {
    y[i] = std::clamp(y[i] - theta, 0.0, 1.0);
    total += y[i];
  }
  // strip floating-point noise so downstream [0,1] checks stay exact
  if (total > 1.0)
    for (int i = 0; i < h; ++i) y[i] /= total;
}

}  // namespace

void project_constraint(std::vector<PhaseField>& stack) {
  if (stack.empty()) return;
  const int h = int(stack.size());
  const int64_t n = stack[0].domain->cell_count();
  std::vector<double> y(static_cast<size_t>(h), 0.0);
  for (int64_t id = 0; id < n; ++id) {
    if (!stack[0].domain->mask[size_t(id)]) {
      for (int i = 0; i < h; ++i) stack[size_t(i)].values[size_t(id)] = 0.0;
      continue;
    }
    for (int i = 0; i < h; ++i) y[size_t(i)] = stack[size_t(i)].values[size_t(id)];
    project_cell(y.data(), h);
    for (int i = 0; i < h; ++i) stack[size_t(i)].values[size_t(id)] = y[size_t(i)];
  }
}

std::vector<IndicatorSet> binarize(const std::vector<PhaseField>& phases,
                                   double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("binarize: threshold must lie in (0,1)");
  const int h = int(phases.size());
  const int64_t n = phases[0].domain->cell_count();
  std::vector<IndicatorSet> out;
  out.reserve(size_t(h));
  for (const auto& p : phases)
    out.push_back(IndicatorSet{p.domain, std::vector<uint8_t>(size_t(n), 0)});
  for (int64_t id = 0; id < n; ++id) {
    int winner = -1;
    double best = -1.0;
    double total = 0.0;
    for (int i = 0; i < h; ++i) {
      const double v = phases[size_t(i)].values[size_t(id)];
      total += std::max(v, 0.0);
      if (v >= threshold && v > best) {
        best = v;
        winner = i;  // strict > keeps the lowest phase_id on ties
      }
    }
    if (winner >= 0 && total > 1.0 + 1e-9)
      throw DomainError("binarize: densities overlap (input is not a projected stack)");
    if (winner >= 0) out[size_t(winner)].support[size_t(id)] = 1;
  }
  return out;
}

namespace {

std::vector<PhaseField> make_init(const ObjectiveSpec& objective, const DomainPtr& domain,
                                  const OptimizerConfig& cfg) {
  const int h = objective.phase_count();
  const int64_t n = domain->cell_count();
  std::vector<PhaseField> phases;
  for (int i = 0; i < h; ++i)
    phases.push_back(PhaseField{domain, std::vector<double>(size_t(n), 0.0), i});

  std::mt19937_64 rng(cfg.seed);
  if (cfg.init == OptimizerConfig::Init::Given) {
    if (int(cfg.init_phases.size()) != h)
      throw ConfigError("optimizer.init=given requires one field per phase");
    phases = cfg.init_phases;
    for (int i = 0; i < h; ++i) phases[size_t(i)].phase_id = i;
  } else if (cfg.init == OptimizerConfig::Init::Random) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int64_t id = 0; id < n; ++id) {
      if (!domain->mask[size_t(id)]) continue;
      for (int i = 0; i < h; ++i) phases[size_t(i)].values[size_t(id)] = uni(rng);
    }
  } else {  // Voronoi seeds, phi = 0.9 on the nearest-seed cells
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Point> seeds;
    for (int i = 0; i < h; ++i) {
      // rejection-sample a masked-in location
      for (int tries = 0; tries < 10000; ++tries) {
        Point p{uni(rng) * domain->extent[0], uni(rng) * domain->extent[1],
                domain->dim == 3 ? uni(rng) * domain->extent[2] : 0.0};
        int i0 = std::min(int(p[0] / domain->h), domain->cells[0] - 1);
        int j0 = std::min(int(p[1] / domain->h), domain->cells[1] - 1);
        int k0 = domain->dim == 3 ? std::min(int(p[2] / domain->h), domain->cells[2] - 1) : 0;
        if (domain->in_mask(domain->index(i0, j0, k0))) {
          seeds.push_back(p);
          break;
        }
      }
      if (int(seeds.size()) != i + 1)
        throw DomainError("optimizer init: could not place a seed inside the mask");
    }
    for (int64_t id = 0; id < n; ++id) {
      if (!domain->mask[size_t(id)]) continue;
      const Point c = domain->center(id);
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int i = 0; i < h; ++i) {
        double d2 = sq(c[0] - seeds[size_t(i)][0]) + sq(c[1] - seeds[size_t(i)][1]);
        if (domain->dim == 3) d2 += sq(c[2] - seeds[size_t(i)][2]);
        if (d2 < bd) {
          bd = d2;
          best = i;
        }
      }
      phases[size_t(best)].values[size_t(id)] = 0.9;
    }
  }
  project_constraint(phases);
  // a phase must not start empty (lambda undefined); re-seed a small blob if so
  for (int i = 0; i < h; ++i) {
    if (measure_density(phases[size_t(i)]) > 0.0) continue;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int tries = 0; tries < 10000; ++tries) {
      const int64_t id = int64_t(uni(rng) * double(n));
      if (id >= 0 && id < n && domain->mask[size_t(id)]) {
        phases[size_t(i)].values[size_t(id)] = 1.0;
        break;
      }
    }
    project_constraint(phases);
  }
  return phases;
}

double inner(const std::vector<std::vector<double>>& g,
             const std::vector<PhaseField>& a, const std::vector<PhaseField>& b) {
  double s = 0.0;
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t id = 0; id < g[i].size(); ++id)
      s += g[i][id] * (a[i].values[id] - b[i].values[id]);
  return s;
}

}  // namespace

OptimizationResult run(const ObjectiveSpec& objective, const DomainPtr& domain,
                       const OptimizerConfig& config, const IterationCallback& on_stage_end) {
  objective.validate();
  config.validate();
  OptimizationResult res;
  const int h = objective.phase_count();
  std::vector<PhaseField> phases = make_init(objective, domain, config);
  std::vector<EigsWorkspace> wss(static_cast<size_t>(h));

  for (size_t stage = 0; stage < config.mu_schedule.size(); ++stage) {
    const double mu = config.mu_schedule[stage];
    std::vector<FunctionalEval> evals;
    ObjectiveValue cur = eval_objective(objective, phases, mu, config.eval, &wss, &evals);
    for (const auto& ev : evals)
      if (ev.degenerate_gap) ++res.degeneracy_warnings;

    const double step_base =
        config.step0 > 0.0 ? config.step0 : 1.0 / (mu * domain->cell_volume());
    const double step_cap = 4096.0 * step_base;
    double step = step_base;
    int flat_count = 0;
    for (int iter = 0; iter < config.max_iters; ++iter) {
      auto grad = objective_gradient(objective, phases, mu, evals);

      bool accepted = false;
      int halvings = 0;
      std::vector<PhaseField> trial;
      ObjectiveValue trial_val;
      std::vector<FunctionalEval> trial_evals;
      double st = step;
      for (; halvings <= config.max_halvings; ++halvings) {
        trial = phases;
        for (int i = 0; i < h; ++i)
          for (size_t id = 0; id < trial[size_t(i)].values.size(); ++id)
            trial[size_t(i)].values[id] -= st * grad[size_t(i)][id];
        project_constraint(trial);
        const double decrease = inner(grad, phases, trial);  // >= 0 on the arc
        bool degenerate = false;
        for (int i = 0; i < h; ++i)
          if (measure_density(trial[size_t(i)]) <= 0.0) degenerate = true;
        if (!degenerate) {
          trial_evals.clear();
          trial_val = eval_objective(objective, trial, mu, config.eval, &wss, &trial_evals);
          if (trial_val.total <= cur.total - config.armijo_c * decrease) {
            accepted = true;
            break;
          }
        }
        st *= config.backtrack;
      }

      if (!accepted) {
        ++res.line_search_failures;
        res.stalled = true;
        break;
      }
      const double prev = cur.total;
      phases = std::move(trial);
      cur = trial_val;
      evals = std::move(trial_evals);
      for (const auto& ev : evals)
        if (ev.degenerate_gap) ++res.degeneracy_warnings;

      TraceRow row;
      row.stage = int(stage);
      row.mu = mu;
      row.iter = iter;
      row.objective = cur.total;
      row.F = cur.F;
      row.measures = cur.measures;
      row.step = st;
      row.halvings = halvings;
      res.trace.push_back(row);

      step = std::min(st * 2.0, step_cap);  // gentle, bounded growth
      const double rel = (prev - cur.total) / std::max(std::abs(prev), 1e-300);
      flat_count = rel < config.stop_tol ? flat_count + 1 : 0;
      if (flat_count >= config.stop_patience) break;
    }
    res.penalized = cur;
    if (on_stage_end && !res.trace.empty()) on_stage_end(res.trace.back(), phases);
  }

  res.densities = phases;
  res.supports = binarize(phases, config.binarize_threshold);
  // exact Dirichlet re-evaluation on the binarized supports is the headline
  try {
    ObjectiveValue ex;
    ex.F.resize(size_t(h));
    ex.measures.resize(size_t(h));
    for (int i = 0; i < h; ++i) {
      FunctionalEval ev =
          eval_functional_exact(objective.functionals[size_t(i)], res.supports[size_t(i)], config.eval);
      ex.F[size_t(i)] = ev.value;
      ex.measures[size_t(i)] = measure(res.supports[size_t(i)]);
    }
    ex.g = objective.aggregate(ex.F);
    double msum = std::accumulate(ex.measures.begin(), ex.measures.end(), 0.0);
    ex.total = ex.g + objective.m * msum;
    res.exact = ex;
    res.exact_valid = true;
  } catch (const DomainError&) {
    res.exact_valid = false;  // e.g. a phase binarized to the empty set
  }
  return res;
}

}  // namespace spshape
