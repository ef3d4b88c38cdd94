#include <doctest.h>

#include <cmath>
#include <random>

#include "core/optimize.hpp"

using namespace spshape;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<PhaseField> stack_of(const DomainPtr& d, std::vector<std::vector<double>> cols) {
  // cols[p] is a per-phase constant list indexed by cell (small helper grids)
  std::vector<PhaseField> out;
  for (size_t p = 0; p < cols.size(); ++p)
    out.push_back(PhaseField{d, cols[p], int(p)});
  return out;
}

FunctionalSpec eig1() { return {FunctionalSpec::Kind::Eigenvalue, 1}; }
}  // namespace

TEST_CASE("per-cell simplex projection on the documented examples") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {4, 4, 1});
  const size_t n = size_t(d->cell_count());

  auto project_pair = [&](double a, double b) {
    auto stack = stack_of(d, {std::vector<double>(n, a), std::vector<double>(n, b)});
    project_constraint(stack);
    return std::pair<double, double>{stack[0].values[0], stack[1].values[0]};
  };

  auto [a1, b1] = project_pair(0.5, 0.3);
  CHECK(a1 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(b1 == doctest::Approx(0.3).epsilon(1e-14));

  auto [a2, b2] = project_pair(0.9, 0.8);
  CHECK(a2 == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(b2 == doctest::Approx(0.45).epsilon(1e-12));

  auto [a3, b3] = project_pair(-0.2, 0.5);
  CHECK(a3 == 0.0);
  CHECK(b3 == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("simplex projection agrees with a brute-force search") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {4, 4, 1});
  const size_t n = size_t(d->cell_count());
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(-0.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double y0 = uni(rng), y1 = uni(rng);
    auto stack = stack_of(d, {std::vector<double>(n, y0), std::vector<double>(n, y1)});
    project_constraint(stack);
    const double px = stack[0].values[0], py = stack[1].values[0];
    // feasibility
    CHECK(px >= -1e-12);
    CHECK(py >= -1e-12);
    CHECK(px + py <= 1.0 + 1e-12);
    // no feasible grid point is closer
    const double dproj = sq(px - y0) + sq(py - y1);
    const int N = 500;
    for (int a = 0; a <= N; ++a) {
      const double qa = double(a) / N;
      for (int b = 0; a + b <= N; ++b) {
        const double qb = double(b) / N;
        CHECK(sq(qa - y0) + sq(qb - y1) >= dproj - 1e-5);
      }
    }
  }
}

TEST_CASE("projection is idempotent and zeros masked-out cells") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {8, 8, 1},
                        [](const Point& p) { return p[0] < 0.5; });
  const size_t n = size_t(d->cell_count());
  auto stack = stack_of(d, {std::vector<double>(n, 0.7), std::vector<double>(n, 0.6)});
  project_constraint(stack);
  auto once = stack;
  project_constraint(stack);
  for (size_t id = 0; id < n; ++id) {
    CHECK(stack[0].values[id] == doctest::Approx(once[0].values[id]).epsilon(1e-14));
    if (!d->mask[id]) {
      CHECK(stack[0].values[id] == 0.0);
      CHECK(stack[1].values[id] == 0.0);
    }
  }
}

TEST_CASE("binarize on the documented examples") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {8, 8, 1});
  const size_t n = size_t(d->cell_count());

  // phi = 1 on a block
  std::vector<double> block(n, 0.0);
  for (int j = 2; j < 5; ++j)
    for (int i = 2; i < 5; ++i) block[size_t(d->index(i, j))] = 1.0;
  auto sets = binarize({PhaseField{d, block, 0}}, 0.5);
  CHECK(sets[0].count() == 9);

  // overlapping densities violate the projected-stack precondition
  auto bad = stack_of(d, {std::vector<double>(n, 0.6), std::vector<double>(n, 0.6)});
  CHECK_THROWS_AS(binarize(bad, 0.5), DomainError);

  // checkerboard 0.49 / 0.51: only the 0.51 phase survives
  auto cb = stack_of(d, {std::vector<double>(n, 0.49), std::vector<double>(n, 0.51)});
  auto out = binarize(cb, 0.5);
  CHECK(out[0].count() == 0);
  CHECK(out[1].count() == int64_t(n));

  // exact tie at threshold: lowest phase_id wins
  auto tie = stack_of(d, {std::vector<double>(n, 0.5), std::vector<double>(n, 0.5)});
  auto tout = binarize(tie, 0.5);
  CHECK(tout[0].count() == int64_t(n));
  CHECK(tout[1].count() == 0);

  CHECK_THROWS_AS(binarize(cb, 0.0), ConfigError);
}

TEST_CASE("single phase, m=0: the phase fills the box") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {32, 32, 1});
  ObjectiveSpec obj;
  obj.g = ObjectiveSpec::Aggregator::Sum;
  obj.functionals = {eig1()};
  obj.m = 0.0;
  OptimizerConfig cfg;
  cfg.max_iters = 60;
  cfg.mu_schedule = {1e3, 1e4};
  cfg.seed = 3;
  OptimizationResult res = run(obj, d, cfg);
  REQUIRE(res.exact_valid);
  // fills (nearly) all of D, so lambda_1 approaches the full-box value
  const double lam_full = eigs_smallest(assemble_exact(IndicatorSet{
                              d, std::vector<uint8_t>(d->mask.begin(), d->mask.end())}), 1)[0]
                              .lambda;
  CHECK(measure(res.supports[0]) >= 0.95 * d->total_measure());
  CHECK(res.exact.total <= lam_full * 1.05);
}

TEST_CASE("two phases on [0,2]x[0,1]: close to the straight split") {
  auto d = build_domain(2, {2.0, 1.0, 0.0}, {64, 32, 1});
  ObjectiveSpec obj;
  obj.g = ObjectiveSpec::Aggregator::Sum;
  obj.functionals = {eig1(), eig1()};
  obj.m = 0.0;
  OptimizerConfig cfg;
  cfg.max_iters = 80;
  cfg.mu_schedule = {1e3, 1e4, 1e5};
  cfg.seed = 1;
  OptimizationResult res = run(obj, d, cfg);
  REQUIRE(res.exact_valid);

  // straight-split oracle at the same resolution
  IndicatorSet left{d, std::vector<uint8_t>(size_t(d->cell_count()), 0)};
  IndicatorSet right = left;
  for (int64_t id = 0; id < d->cell_count(); ++id)
    (d->center(id)[0] < 1.0 ? left : right).support[size_t(id)] = 1;
  const double oracle = eigs_smallest(assemble_exact(left), 1)[0].lambda +
                        eigs_smallest(assemble_exact(right), 1)[0].lambda;
  CHECK(res.exact.total <= oracle * 1.10);

  // binarized phases are pairwise disjoint
  for (size_t id = 0; id < res.supports[0].support.size(); ++id)
    CHECK(int(res.supports[0].support[id]) + int(res.supports[1].support[id]) <= 1);
}

TEST_CASE("large m shrinks the phase strictly inside the box") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {48, 48, 1});
  ObjectiveSpec obj;
  obj.g = ObjectiveSpec::Aggregator::Sum;
  obj.functionals = {eig1()};
  obj.m = 200.0;
  OptimizerConfig cfg;
  cfg.max_iters = 80;
  cfg.mu_schedule = {1e3, 1e4};
  cfg.seed = 7;
  OptimizationResult res = run(obj, d, cfg);
  REQUIRE(res.exact_valid);
  CHECK(measure(res.supports[0]) < 0.8 * d->total_measure());
  CHECK(measure(res.supports[0]) > 0.0);
  // compare the objective against the optimal-disk value j01^2/R^2 + m pi R^2
  const double j01 = 2.404825557695773;
  const double Ropt = std::pow(j01 * j01 / (kPi * obj.m), 0.25);
  const double disk_value = j01 * j01 / (Ropt * Ropt) + obj.m * kPi * Ropt * Ropt;
  CHECK(res.exact.total <= disk_value * 1.10);
}

TEST_CASE("feasibility and monotone descent along the trace") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {24, 24, 1});
  ObjectiveSpec obj;
  obj.g = ObjectiveSpec::Aggregator::Sum;
  obj.functionals = {eig1(), eig1()};
  obj.m = 10.0;
  OptimizerConfig cfg;
  cfg.max_iters = 30;
  cfg.mu_schedule = {1e3, 1e4};
  cfg.seed = 11;
  cfg.init = OptimizerConfig::Init::Random;
  OptimizationResult res = run(obj, d, cfg);

  for (const auto& phi : res.densities)
    for (int64_t id = 0; id < d->cell_count(); ++id)
      CHECK(phi.values[size_t(id)] >= -1e-12);
  for (int64_t id = 0; id < d->cell_count(); ++id) {
    double s = 0.0;
    for (const auto& phi : res.densities) s += phi.values[size_t(id)];
    CHECK(s <= 1.0 + 1e-12);
  }
  // objective decreases between accepted steps within each stage
  for (size_t i = 1; i < res.trace.size(); ++i)
    if (res.trace[i].stage == res.trace[i - 1].stage)
      CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-9);
}

TEST_CASE("identical seeds give identical traces") {
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {24, 24, 1});
  ObjectiveSpec obj;
  obj.g = ObjectiveSpec::Aggregator::Sum;
  obj.functionals = {eig1(), eig1()};
  obj.m = 5.0;
  OptimizerConfig cfg;
  cfg.max_iters = 20;
  cfg.mu_schedule = {1e3, 1e4};
  cfg.seed = 42;
  OptimizationResult a = run(obj, d, cfg);
  OptimizationResult b = run(obj, d, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i)
    CHECK(a.trace[i].objective == b.trace[i].objective);  // bitwise
}

TEST_CASE("config validation") {
  OptimizerConfig cfg;
  cfg.mu_schedule = {1e4, 1e3};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = OptimizerConfig{};
  cfg.backtrack = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = OptimizerConfig{};
  cfg.binarize_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("constrained-cell optimality probe") {
  // freeze one phase, re-optimize the other inside its separating
  // neighborhood: the objective must not improve beyond tolerance
  auto d = build_domain(2, {1.0, 1.0, 0.0}, {48, 48, 1});
  ObjectiveSpec obj;
  obj.g = ObjectiveSpec::Aggregator::Sum;
  obj.functionals = {eig1(), eig1()};
  obj.m = 30.0;
  OptimizerConfig cfg;
  cfg.max_iters = 60;
  cfg.mu_schedule = {1e3, 1e4};
  cfg.seed = 5;
  OptimizationResult res = run(obj, d, cfg);
  REQUIRE(res.exact_valid);

  // D_1 = complement of the one-cell dilation of phase 0
  IndicatorSet dil0 = dilate(res.supports[0], 1);
  auto masked = std::make_shared<GridDomain>(*d);
  for (size_t id = 0; id < masked->mask.size(); ++id)
    if (dil0.support[id]) masked->mask[id] = 0;
  DomainPtr d1(masked);

  ObjectiveSpec single;
  single.g = ObjectiveSpec::Aggregator::Sum;
  single.functionals = {eig1()};
  single.m = obj.m;
  OptimizerConfig c1 = cfg;
  c1.init = OptimizerConfig::Init::Given;
  PhaseField start{d1, std::vector<double>(res.densities[1].values.begin(),
                                           res.densities[1].values.end()), 0};
  for (size_t id = 0; id < start.values.size(); ++id)
    if (!d1->mask[id]) start.values[id] = 0.0;
  c1.init_phases = {start};
  OptimizationResult re = run(single, d1, c1);
  REQUIRE(re.exact_valid);

  const double before =
      eval_functional_exact(eig1(), res.supports[1]).value + obj.m * measure(res.supports[1]);
  CHECK(re.exact.total >= before * (1.0 - 0.05));
}
