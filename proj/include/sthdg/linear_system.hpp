#ifndef STHDG_LINEAR_SYSTEM_HPP
#define STHDG_LINEAR_SYSTEM_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "sthdg/forms.hpp"

namespace sthdg {

/// Timings and solver quality numbers of one slab solve.
struct SolveStats {
  double assembly_seconds = 0.0;
  double condensation_seconds = 0.0;
  double solve_seconds = 0.0;
  double backsub_seconds = 0.0;
  double condensed_residual = 0.0;  ///< inf-norm of S*x - r after refinement
  int refinement_steps = 0;
};

/// Solves one slab by static condensation onto the trace unknowns.
///
/// Cell unknowns are eliminated per cell with a dense LU factorization; the
/// remaining sparse system over the free facet dofs is solved by a sparse
/// direct factorization followed by iterative refinement.  Dirichlet facet
/// dofs carry their boundary values and are folded into the right-hand side
/// before condensation.
class SlabSolver {
 public:
  SlabSolver(const SlabMesh& mesh, const DofLayout& layout, const ReferenceTables& ref);

  SlabState solve(const FormOptions& opt, const SlabState* advect,
                  const ProblemData& data, const TraceField* bottom,
                  SolveStats* stats = nullptr);

  /// Condensed matrix/right-hand side of the most recent solve.
  const Eigen::SparseMatrix<double>& condensed_matrix() const { return S_; }
  const Eigen::VectorXd& condensed_rhs() const { return rhs_; }
  const Eigen::VectorXd& condensed_solution() const { return xbar_; }

 private:
  const SlabMesh& mesh_;
  const DofLayout& layout_;
  const ReferenceTables& ref_;
  Eigen::SparseMatrix<double> S_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd xbar_;
};

/// Full uncondensed slab system.  Unknown order: all cell dofs (cell-major),
/// then the free facet dofs in their global order.  Constrained facet values
/// are folded into the right-hand side.
struct DenseSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

/// Assembles the uncondensed system without solving it.  Intended for small
/// meshes in verification tests.
DenseSystem assemble_dense(const SlabMesh& mesh, const DofLayout& layout,
                           const ReferenceTables& ref, const FormOptions& opt,
                           const SlabState* advect, const ProblemData& data,
                           const TraceField* bottom);

/// Reference solve of the full uncondensed system with a dense factorization.
SlabState dense_solve(const SlabMesh& mesh, const DofLayout& layout,
                      const ReferenceTables& ref, const FormOptions& opt,
                      const SlabState* advect, const ProblemData& data,
                      const TraceField* bottom);

/// Writes a sparse matrix in MatrixMarket coordinate format.
void write_matrix_market(const Eigen::SparseMatrix<double>& M, const std::string& path);

}  // namespace sthdg

#endif  // STHDG_LINEAR_SYSTEM_HPP
