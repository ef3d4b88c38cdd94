#pragma once

#include <Eigen/Sparse>
#include <optional>

#include "grid.hpp"

namespace spshape {

enum class BoundaryMode { Exact, Penalized };

// Finite-difference Dirichlet Laplacian, standard (2*dim+1)-point stencil.
// Exact mode keeps only the support cells as unknowns (u = 0 at every removed
// cell center). Penalized mode keeps all masked cells and adds mu*(1-phi) to
// the diagonal.
struct LaplaceOperator {
  DomainPtr domain;
  BoundaryMode mode = BoundaryMode::Exact;
  double mu = 0.0;
  std::vector<int32_t> dof_of_cell;  // -1 where the cell is not an unknown
  std::vector<int64_t> cell_of_dof;
  Eigen::SparseMatrix<double> matrix;  // SPD

  int64_t ndof() const { return int64_t(cell_of_dof.size()); }
  // scatter a dof vector to a full-size cell field (zero off the dofs)
  std::vector<double> to_cells(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_cells(const std::vector<double>& f) const;
};

struct TorsionField {
  DomainPtr domain;
  std::vector<double> w;  // full cell field, >= 0, zero outside the dofs
  int phase_id = 0;
  BoundaryMode mode = BoundaryMode::Exact;
  double mu = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct EigenPair {
  double lambda = 0.0;
  std::vector<double> u;  // full cell field, h^dim-normalized: h^dim*sum(u^2)=1
  int index = 1;
  double residual = 0.0;
};

LaplaceOperator assemble_exact(const IndicatorSet& support);
LaplaceOperator assemble_penalized(const PhaseField& phi, double mu);

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iters = 0;  // 0 -> scaled with problem size
};

TorsionField solve_torsion(const LaplaceOperator& op, const CgOptions& opts = {});

double torsion_energy(const TorsionField& w);
double gamma_distance(const TorsionField& a, const TorsionField& b);

struct EigsOptions {
  double rel_tol = 1e-8;    // on ||A u - lambda u|| <= tol * lambda
  int max_iters = 250;
  uint64_t seed = 0x9e3779b97f4a7c15ull;
  int block_extra = 5;      // guard vectors beyond k
};

// Shift-invert subspace iteration with Rayleigh-Ritz extraction. The sparse
// factorization pattern and the iterate block survive between calls, so
// repeated solves on operators with the same sparsity (the optimizer loop)
// warm-start cheaply.
class EigsWorkspace {
public:
  std::vector<EigenPair> solve(const LaplaceOperator& op, int k,
                               const EigsOptions& opts = {});

private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
  Eigen::MatrixXd block_;
};

std::vector<EigenPair> eigs_smallest(const LaplaceOperator& op, int k,
                                     const EigsOptions& opts = {});

}  // namespace spshape
