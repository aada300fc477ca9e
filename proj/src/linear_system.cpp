#include "sthdg/linear_system.hpp"

#include <Eigen/SparseLU>
#ifdef STHDG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <chrono>
#include <fstream>

#include "sthdg/errors.hpp"

namespace sthdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Per-cell data retained for back-substitution.
struct CellFactor {
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd B_free;           // cell x free-facet couplings
  Eigen::VectorXd rW;               // constraint-folded cell load
  std::vector<int> free_globals;    // global ids of the free facet columns
};

}  // namespace

SlabSolver::SlabSolver(const SlabMesh& mesh, const DofLayout& layout,
                       const ReferenceTables& ref)
    : mesh_(mesh), layout_(layout), ref_(ref) {}

SlabState SlabSolver::solve(const FormOptions& opt, const SlabState* advect,
                            const ProblemData& data, const TraceField* bottom,
                            SolveStats* stats) {
  const int num_cells = mesh_.num_cells();
  const int fb = layout_.facet_block();
  const int n = layout_.num_global;

  std::vector<CellFactor> factors(num_cells);
  std::vector<Eigen::Triplet<double>> triplets;
  rhs_ = Eigen::VectorXd::Zero(n);

  SolveStats local_stats;
  auto t_start = Clock::now();

  CellSystem sys;
  double assembly_seconds = 0.0;
  for (int c = 0; c < num_cells; ++c) {
    auto t_cell = Clock::now();
    assemble_cell(mesh_, layout_, ref_, opt, advect, data, bottom, c, sys);
    assembly_seconds += seconds_since(t_cell);

    const int nf = static_cast<int>(sys.qfacets.size()) * fb;

    // Split facet columns into free / constrained and fold constrained values
    // into the loads.
    CellFactor& fac = factors[c];
    std::vector<int> free_local;
    free_local.reserve(nf);
    Eigen::VectorXd rW = sys.rW;
    Eigen::VectorXd rF = sys.rF;
    for (size_t s = 0; s < sys.qfacets.size(); ++s) {
      const int q = sys.qfacets[s];
      for (int j = 0; j < fb; ++j) {
        const int lj = static_cast<int>(s) * fb + j;
        const int g = layout_.facet_dof_global(q, j);
        if (g >= 0) {
          free_local.push_back(lj);
          fac.free_globals.push_back(g);
        } else {
          const double val = layout_.facet_dof_value(q, j);
          if (val != 0.0) {
            rW -= sys.B.col(lj) * val;
            rF -= sys.D.col(lj) * val;
          }
        }
      }
    }
    const int nfree = static_cast<int>(free_local.size());

    fac.lu.compute(sys.A);
    if (!fac.lu.isInvertible())
      throw SingularLocalBlock("cell " + std::to_string(c) +
                               ": local cell block is singular");
    fac.B_free.resize(sys.A.rows(), nfree);
    Eigen::MatrixXd C_free(nfree, sys.A.cols());
    Eigen::MatrixXd D_free(nfree, nfree);
    Eigen::VectorXd rF_free(nfree);
    for (int i = 0; i < nfree; ++i) {
      fac.B_free.col(i) = sys.B.col(free_local[i]);
      C_free.row(i) = sys.C.row(free_local[i]);
      rF_free[i] = rF[free_local[i]];
      for (int j = 0; j < nfree; ++j) D_free(i, j) = sys.D(free_local[i], free_local[j]);
    }
    fac.rW = rW;

    const Eigen::MatrixXd AinvB = fac.lu.solve(fac.B_free);
    const Eigen::VectorXd AinvR = fac.lu.solve(rW);
    const Eigen::MatrixXd S_loc = D_free - C_free * AinvB;
    const Eigen::VectorXd r_loc = rF_free - C_free * AinvR;

    for (int i = 0; i < nfree; ++i) {
      rhs_[fac.free_globals[i]] += r_loc[i];
      for (int j = 0; j < nfree; ++j)
        triplets.emplace_back(fac.free_globals[i], fac.free_globals[j], S_loc(i, j));
    }
  }

  local_stats.assembly_seconds = assembly_seconds;
  local_stats.condensation_seconds = seconds_since(t_start) - assembly_seconds;
  auto t_solve = Clock::now();

  S_.resize(n, n);
  S_.setFromTriplets(triplets.begin(), triplets.end());
  triplets.clear();
  triplets.shrink_to_fit();

  // Sparse direct solve with iterative refinement.
#ifdef STHDG_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> sparse_lu;
#else
  Eigen::SparseLU<Eigen::SparseMatrix<double>> sparse_lu;
#endif
  sparse_lu.compute(S_);
  if (sparse_lu.info() != Eigen::Success)
    throw SingularGlobal("condensed trace system factorization failed");
  xbar_ = sparse_lu.solve(rhs_);
  if (!xbar_.allFinite())
    throw SingularGlobal("condensed trace system solve produced non-finite values");

  Eigen::VectorXd resid = rhs_ - S_ * xbar_;
  xbar_ += sparse_lu.solve(resid);
  local_stats.refinement_steps = 1;
  resid = rhs_ - S_ * xbar_;
  double rnorm = resid.lpNorm<Eigen::Infinity>();
  const double scale =
      std::max(1.0, rhs_.lpNorm<Eigen::Infinity>() + xbar_.lpNorm<Eigen::Infinity>());
  if (rnorm > 1e-13 * scale) {
    xbar_ += sparse_lu.solve(resid);
    local_stats.refinement_steps = 2;
    resid = rhs_ - S_ * xbar_;
    rnorm = resid.lpNorm<Eigen::Infinity>();
  }
  local_stats.condensed_residual = rnorm;
  local_stats.solve_seconds = seconds_since(t_solve);

  // Back-substitution.
  auto t_back = Clock::now();
  SlabState out = SlabState::zero(num_cells, layout_.num_qfacets(), layout_);
  for (int q = 0; q < layout_.num_qfacets(); ++q)
    for (int j = 0; j < fb; ++j) {
      const int g = layout_.facet_dof_global(q, j);
      out.facet(q, j) = g >= 0 ? xbar_[g] : layout_.facet_dof_value(q, j);
    }
  for (int c = 0; c < num_cells; ++c) {
    const CellFactor& fac = factors[c];
    Eigen::VectorXd xf(fac.free_globals.size());
    for (size_t i = 0; i < fac.free_globals.size(); ++i) xf[i] = xbar_[fac.free_globals[i]];
    out.cell.row(c) = fac.lu.solve(fac.rW - fac.B_free * xf).transpose();
  }
  local_stats.backsub_seconds = seconds_since(t_back);

  if (stats) *stats = local_stats;
  return out;
}

DenseSystem assemble_dense(const SlabMesh& mesh, const DofLayout& layout,
                           const ReferenceTables& ref, const FormOptions& opt,
                           const SlabState* advect, const ProblemData& data,
                           const TraceField* bottom) {
  const int num_cells = mesh.num_cells();
  const int cb = layout.cell_block();
  const int fb = layout.facet_block();
  const int n = num_cells * cb + layout.num_global;

  DenseSystem out;
  Eigen::MatrixXd& M = out.matrix;
  Eigen::VectorXd& r = out.rhs;
  M = Eigen::MatrixXd::Zero(n, n);
  r = Eigen::VectorXd::Zero(n);
  const auto facet_offset = [&](int g) { return num_cells * cb + g; };

  CellSystem sys;
  for (int c = 0; c < num_cells; ++c) {
    assemble_cell(mesh, layout, ref, opt, advect, data, bottom, c, sys);
    const int row0 = c * cb;
    M.block(row0, row0, cb, cb) += sys.A;
    r.segment(row0, cb) += sys.rW;

    for (size_t s = 0; s < sys.qfacets.size(); ++s) {
      const int q = sys.qfacets[s];
      for (int j = 0; j < fb; ++j) {
        const int lj = static_cast<int>(s) * fb + j;
        const int g = layout.facet_dof_global(q, j);
        if (g >= 0) {
          M.block(row0, facet_offset(g), cb, 1) += sys.B.col(lj);
          M.block(facet_offset(g), row0, 1, cb) += sys.C.row(lj);
          r[facet_offset(g)] += sys.rF[lj];
        } else {
          const double val = layout.facet_dof_value(q, j);
          if (val != 0.0) r.segment(row0, cb) -= sys.B.col(lj) * val;
        }
      }
      // Facet-facet couplings (both facets of the pair may be constrained).
      for (int j = 0; j < fb; ++j) {
        const int lj = static_cast<int>(s) * fb + j;
        const int gj = layout.facet_dof_global(q, j);
        for (size_t s2 = 0; s2 < sys.qfacets.size(); ++s2) {
          const int q2 = sys.qfacets[s2];
          for (int j2 = 0; j2 < fb; ++j2) {
            const int lj2 = static_cast<int>(s2) * fb + j2;
            const int gj2 = layout.facet_dof_global(q2, j2);
            const double v = sys.D(lj, lj2);
            if (v == 0.0) continue;
            if (gj >= 0 && gj2 >= 0) {
              M(facet_offset(gj), facet_offset(gj2)) += v;
            } else if (gj >= 0) {
              r[facet_offset(gj)] -= v * layout.facet_dof_value(q2, j2);
            }
          }
        }
      }
    }
  }
  return out;
}

SlabState dense_solve(const SlabMesh& mesh, const DofLayout& layout,
                      const ReferenceTables& ref, const FormOptions& opt,
                      const SlabState* advect, const ProblemData& data,
                      const TraceField* bottom) {
  const int num_cells = mesh.num_cells();
  const int cb = layout.cell_block();
  const int fb = layout.facet_block();

  const DenseSystem sys = assemble_dense(mesh, layout, ref, opt, advect, data, bottom);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.matrix);
  if (!lu.isInvertible()) throw SingularGlobal("uncondensed reference system is singular");
  const Eigen::VectorXd x = lu.solve(sys.rhs);

  SlabState out = SlabState::zero(num_cells, layout.num_qfacets(), layout);
  for (int c = 0; c < num_cells; ++c) out.cell.row(c) = x.segment(c * cb, cb).transpose();
  for (int q = 0; q < layout.num_qfacets(); ++q)
    for (int j = 0; j < fb; ++j) {
      const int g = layout.facet_dof_global(q, j);
      out.facet(q, j) = g >= 0 ? x[num_cells * cb + g] : layout.facet_dof_value(q, j);
    }
  return out;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& M, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
  out.precision(17);
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << std::scientific << it.value()
          << "\n";
}

}  // namespace sthdg
