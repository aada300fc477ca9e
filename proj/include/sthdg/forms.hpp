#ifndef STHDG_FORMS_HPP
#define STHDG_FORMS_HPP

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "sthdg/basis.hpp"
#include "sthdg/dof_layout.hpp"
#include "sthdg/quadrature.hpp"
#include "sthdg/slab_mesh.hpp"

namespace sthdg {

/// Coefficient vectors of one slab solution (or Picard iterate).
///
/// Row c of `cell` holds cell c's dofs in the order [u_x | u_y | p]; row q of
/// `facet` holds trace facet q's dofs in the order [u_x | u_y | p], including
/// the values of constrained (Dirichlet) dofs.
struct SlabState {
  Eigen::MatrixXd cell;
  Eigen::MatrixXd facet;

  static SlabState zero(int num_cells, int num_qfacets, const DofLayout& layout);
};

/// Velocity trace on one spatial time level, stored per spatial triangle as
/// coefficients [u_x | u_y] over the orthonormal reference-triangle basis in
/// the triangle's canonical (sorted-vertex) frame.  The same frame is used by
/// the bottom/top facets of the adjacent slabs, so hand-off between slabs is
/// exact.
struct TraceField {
  int degree = 0;
  Eigen::MatrixXd coeffs;  ///< num_triangles x 2*n2

  static TraceField zero(int num_triangles, int degree);

  /// Integral of |u|^2 over the time level; `areas` are the physical triangle
  /// areas at that level (the basis is orthonormal on the reference triangle,
  /// so each triangle contributes 2*area*|coeffs|^2).
  double energy(const Eigen::VectorXd& areas) const;
};

/// Analytic problem data consumed by assembly.
struct ProblemData {
  /// Momentum forcing f at a space-time point.
  std::function<Eigen::Vector2d(const Eigen::Vector3d&)> forcing;
  /// Neumann data g at a space-time point on a Neumann facet.
  std::function<Eigen::Vector2d(const Eigen::Vector3d&)> neumann;
};

/// Which parts of the scheme to assemble.
struct FormOptions {
  double nu = 1.0;
  double alpha = 0.0;     ///< full penalty coefficient (e.g. 6 k^2)
  bool viscous = true;    ///< include the viscous form
  bool pressure = true;   ///< include the pressure-velocity coupling
  bool transport = true;  ///< include the temporal/convective form
  bool ale = false;       ///< compute facet normal speeds via the grid velocity
};

/// Reference-element tables shared by all cells of a slab: one quadrature
/// rule (exact to degree 3k+1, enough for every term of the scheme) and the
/// basis values/derivatives at its points.
struct ReferenceTables {
  explicit ReferenceTables(int degree);

  int degree;
  BasisSet b3;  ///< cell basis (dim 3)
  BasisSet b2;  ///< facet basis (dim 2)
  QuadratureRule vol;
  QuadratureRule face;
  Eigen::MatrixXd phi;                  ///< cell basis at volume points
  std::array<Eigen::MatrixXd, 3> dphi;  ///< reference derivatives at volume points
  Eigen::MatrixXd psi;                  ///< facet basis at facet points
};

/// Dense local system of one cell.  Row/column order: cell dofs
/// [u_x | u_y | p], then for each entry of `qfacets` (the cell's trace
/// facets, in cell_facets order) one block [u_x | u_y | p].
struct CellSystem {
  Eigen::MatrixXd A;   ///< cell x cell
  Eigen::MatrixXd B;   ///< cell x facet
  Eigen::MatrixXd C;   ///< facet x cell
  Eigen::MatrixXd D;   ///< facet x facet
  Eigen::VectorXd rW;  ///< cell load
  Eigen::VectorXd rF;  ///< facet load
  std::vector<int> qfacets;  ///< trace slots owning the facet blocks
};

/// Assembles all requested forms of one cell into `out`.
///
/// `advect` supplies the advecting field (cell values for the facet upwind
/// flux and the volume term, facet values for the outflow boundary term);
/// nullptr means a zero advecting field.  `bottom` supplies the incoming
/// trace for the bottom-facet load; nullptr means zero.  Constrained facet
/// dofs are assembled like free ones; elimination happens downstream.
void assemble_cell(const SlabMesh& mesh, const DofLayout& layout,
                   const ReferenceTables& ref, const FormOptions& opt,
                   const SlabState* advect, const ProblemData& data,
                   const TraceField* bottom, int cell, CellSystem& out);

/// Evaluates the quadratic form x^T M x of the assembled (unconstrained)
/// operator over the whole slab, where x is given by `state`.  Used by
/// property tests (e.g. the transport energy identity).
double quadratic_form(const SlabMesh& mesh, const DofLayout& layout,
                      const ReferenceTables& ref, const FormOptions& opt,
                      const SlabState* advect, const SlabState& state);

}  // namespace sthdg

#endif  // STHDG_FORMS_HPP
