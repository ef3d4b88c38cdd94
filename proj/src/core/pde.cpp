#include "pde.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <cstdio>
#include <cstdlib>

namespace spshape {

std::vector<double> LaplaceOperator::to_cells(const Eigen::VectorXd& x) const {
  std::vector<double> f(size_t(domain->cell_count()), 0.0);
  for (int64_t d = 0; d < ndof(); ++d) f[size_t(cell_of_dof[size_t(d)])] = x[d];
  return f;
}

Eigen::VectorXd LaplaceOperator::from_cells(const std::vector<double>& f) const {
  Eigen::VectorXd x(ndof());
  for (int64_t d = 0; d < ndof(); ++d) x[d] = f[size_t(cell_of_dof[size_t(d)])];
  return x;
}

namespace {

LaplaceOperator assemble_impl(const DomainPtr& domain,
                              const std::vector<uint8_t>& dof_mask,
                              const double* penalty_diag, BoundaryMode mode,
                              double mu) {
  LaplaceOperator op;
  op.domain = domain;
  op.mode = mode;
  op.mu = mu;
  const GridDomain& d = *domain;
  op.dof_of_cell.assign(size_t(d.cell_count()), -1);
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    if (dof_mask[size_t(id)]) {
      op.dof_of_cell[size_t(id)] = int32_t(op.cell_of_dof.size());
      op.cell_of_dof.push_back(id);
    }
  }
  if (op.cell_of_dof.empty())
    throw DomainError("assemble: empty support gives an empty operator");

  const double ih2 = 1.0 / (d.h * d.h);
  const int nx = d.cells[0], ny = d.cells[1], nz = d.cells[2];
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(size_t(op.ndof()) * (2 * d.dim + 1));
  for (int64_t r = 0; r < op.ndof(); ++r) {
    const int64_t id = op.cell_of_dof[size_t(r)];
    int i, j, k;
    d.coords(id, i, j, k);
    double diag = 2.0 * d.dim * ih2;
    if (penalty_diag) diag += penalty_diag[id];
    trips.emplace_back(int(r), int(r), diag);
    const int di[6] = {1, -1, 0, 0, 0, 0};
    const int dj[6] = {0, 0, 1, -1, 0, 0};
    const int dk[6] = {0, 0, 0, 0, 1, -1};
    const int nf = d.dim == 3 ? 6 : 4;
    for (int q = 0; q < nf; ++q) {
      const int ni = i + di[q], nj = j + dj[q], nk = k + dk[q];
      if (ni < 0 || ni >= nx || nj < 0 || nj >= ny || nk < 0 || nk >= nz) continue;
      const int32_t c = op.dof_of_cell[size_t(d.index(ni, nj, nk))];
      if (c >= 0) trips.emplace_back(int(r), int(c), -ih2);
    }
  }
  op.matrix.resize(op.ndof(), op.ndof());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  return op;
}

}  // namespace

LaplaceOperator assemble_exact(const IndicatorSet& support) {
  std::vector<uint8_t> dof_mask(support.support.size(), 0);
  for (size_t id = 0; id < dof_mask.size(); ++id)
    dof_mask[id] = support.support[id] && support.domain->mask[id];
  return assemble_impl(support.domain, dof_mask, nullptr, BoundaryMode::Exact, 0.0);
}

LaplaceOperator assemble_penalized(const PhaseField& phi, double mu) {
  if (!(mu > 0.0)) throw ConfigError("assemble_penalized: mu must be > 0");
  const GridDomain& d = *phi.domain;
  std::vector<double> pen(size_t(d.cell_count()), 0.0);
  for (int64_t id = 0; id < d.cell_count(); ++id) {
    const double v = phi.values[size_t(id)];
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw DomainError("assemble_penalized: density out of [0,1]");
    pen[size_t(id)] = mu * (1.0 - std::clamp(v, 0.0, 1.0));
  }
  return assemble_impl(phi.domain, d.mask, pen.data(), BoundaryMode::Penalized, mu);
}

TorsionField solve_torsion(const LaplaceOperator& op, const CgOptions& opts) {
  const int64_t n = op.ndof();
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd invdiag(n);
  for (int64_t i = 0; i < n; ++i) invdiag[i] = 1.0 / op.matrix.coeff(i, i);

  // plain PCG with Jacobi preconditioner
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = invdiag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double bnorm = b.norm();
  const int maxit = opts.max_iters > 0
                        ? opts.max_iters
                        : std::max<int>(2000, int(40.0 * std::sqrt(double(n))));
  int it = 0;
  double relres = 1.0;
  for (; it < maxit; ++it) {
    relres = r.norm() / bnorm;
    if (relres <= opts.rel_tol) break;
    Eigen::VectorXd Ap = op.matrix * p;
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = invdiag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (relres > opts.rel_tol)
    throw SolverError("torsion CG did not converge in " + std::to_string(maxit) +
                          " iterations, relative residual " + std::to_string(relres),
                      relres);

  TorsionField tf;
  tf.domain = op.domain;
  tf.mode = op.mode;
  tf.mu = op.mu;
  tf.iterations = it;
  tf.residual = relres;
  // clip the tiny negative round-off so the discrete maximum principle holds
  for (int64_t i = 0; i < n; ++i) x[i] = std::max(x[i], 0.0);
  tf.w = op.to_cells(x);
  return tf;
}

double torsion_energy(const TorsionField& tf) {
  double s = 0.0;
  for (double v : tf.w) s += v;
  return -0.5 * tf.domain->cell_volume() * s;
}

double gamma_distance(const TorsionField& a, const TorsionField& b) {
  if (a.domain != b.domain &&
      (a.domain->cells != b.domain->cells || a.domain->h != b.domain->h))
    throw DomainError("gamma_distance: fields live on different domains");
  double s = 0.0;
  for (size_t i = 0; i < a.w.size(); ++i) s += std::abs(a.w[i] - b.w[i]);
  return a.domain->cell_volume() * s;
}

std::vector<EigenPair> EigsWorkspace::solve(const LaplaceOperator& op, int k,
                                            const EigsOptions& opts) {
  if (k < 1 || k > 20) throw ConfigError("eigs_smallest: k must be in [1,20]");
  const int64_t n = op.ndof();
  if (n < k) throw DomainError("eigs_smallest: operator smaller than k");
  int kb = int(std::min<int64_t>(n, k + opts.block_extra));
  const int kb_max = int(std::min<int64_t>(n, k + 24));

  if (!analyzed_ || ldlt_.rows() != n) {
    ldlt_.analyzePattern(op.matrix);
    analyzed_ = true;
    block_.resize(0, 0);
  }
  // shift-invert subspace iteration; sigma is re-chosen when the wanted
  // window is narrow relative to its distance from the shift (e.g. strongly
  // penalized operators, whose spectrum is mu + O(1))
  double sigma = 0.0;
  auto factorize = [&](double s) {
    if (s == 0.0) {
      ldlt_.factorize(op.matrix);
    } else {
      Eigen::SparseMatrix<double> shifted = op.matrix;
      Eigen::SparseMatrix<double> eye(n, n);
      eye.setIdentity();
      shifted -= s * eye;
      ldlt_.factorize(shifted);
    }
    if (ldlt_.info() != Eigen::Success)
      throw SolverError("eigs: sparse factorization failed");
  };
  factorize(sigma);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X;
  if (block_.rows() == n && block_.cols() >= kb) {
    X = block_.leftCols(kb);
  } else {
    X.resize(n, kb);
    for (int c = 0; c < kb; ++c)
      for (int64_t i = 0; i < n; ++i) X(i, c) = gauss(rng);
  }

  Eigen::VectorXd ritz(kb);
  Eigen::VectorXd resid(kb);
  bool converged = false;
  int reshifts = 0;
  for (int it = 0; it < opts.max_iters && !converged; ++it) {
    Eigen::MatrixXd Y(n, kb);
    for (int c = 0; c < kb; ++c) Y.col(c) = ldlt_.solve(X.col(c));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, kb);
    Eigen::MatrixXd AQ = op.matrix * Q;
    Eigen::MatrixXd T = Q.transpose() * AQ;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    X = Q * es.eigenvectors();
    ritz.resize(kb);
    resid.resize(kb);
    ritz = es.eigenvalues();
    converged = true;
    for (int c = 0; c < k; ++c) {
      resid[c] = (op.matrix * X.col(c) - ritz[c] * X.col(c)).norm();
      if (resid[c] > opts.rel_tol * std::abs(ritz[c])) converged = false;
    }
    if (const char* tr = std::getenv("SPS_EIGS_TRACE"); tr && *tr == '1') {
      std::fprintf(stderr, "[eigs] it=%d kb=%d sigma=%.6g ritz0=%.9g ritz_k=%.9g ritz_kb=%.9g res0=%.3g\n",
                   it, kb, sigma, ritz[0], ritz[k - 1], ritz[kb - 1],
                   resid[0] / std::abs(ritz[0]));
    }
    if (converged || it < 1) continue;

    const double lo = ritz[0], hi = ritz[k - 1];
    const double scale = std::max(std::abs(lo), 1.0);
    // the guard buffer must end outside a cluster or the iteration stalls
    if (ritz[kb - 1] - hi < 1e-6 * scale && kb < kb_max) {
      const int grow = std::min(4, kb_max - kb);
      X.conservativeResize(Eigen::NoChange, kb + grow);
      for (int c = kb; c < kb + grow; ++c)
        for (int64_t i = 0; i < n; ++i) X(i, c) = gauss(rng);
      kb += grow;
      continue;
    }
    // Ritz values converge from above, so sigma must chase lo downward and
    // stay strictly below it; re-factorize when it gets close or overshoots
    const double g_target =
        std::max(hi - lo, 0.02 * std::max(ritz[kb - 1] - lo, 1e-3 * scale));
    const double factor = (hi - sigma) / std::max(ritz[kb - 1] - sigma, 1e-300);
    const bool too_close = sigma > lo - 0.5 * g_target;
    if ((factor > 0.6 || too_close) && reshifts < 12) {
      sigma = lo - g_target;
      factorize(sigma);
      ++reshifts;
    }
  }
  block_ = X;
  if (!converged) {
    std::string msg = "eigs did not converge; residuals:";
    for (int c = 0; c < k; ++c)
      msg += " " + std::to_string(resid[c] / std::abs(ritz[c]));
    throw SolverError(msg, resid[0] / std::abs(ritz[0]));
  }

  const double scale = 1.0 / std::sqrt(op.domain->cell_volume());
  std::vector<EigenPair> out(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) {
    EigenPair& ep = out[size_t(c)];
    ep.lambda = ritz[c];
    ep.index = c + 1;
    ep.residual = resid[c] / std::abs(ritz[c]);
    Eigen::VectorXd u = X.col(c) * scale;  // h^dim * sum u^2 = 1
    ep.u = op.to_cells(u);
  }
  return out;
}

std::vector<EigenPair> eigs_smallest(const LaplaceOperator& op, int k,
                                     const EigsOptions& opts) {
  EigsWorkspace ws;
  return ws.solve(op, k, opts);
}

}  // namespace spshape
