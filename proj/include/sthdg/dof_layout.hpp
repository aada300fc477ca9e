#ifndef STHDG_DOF_LAYOUT_HPP
#define STHDG_DOF_LAYOUT_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sthdg/slab_mesh.hpp"

namespace sthdg {

enum class BoundaryKind { Dirichlet, Neumann };

/// Global numbering of the trace unknowns of one slab.
///
/// Cell unknowns (velocity components of degree `degree`, pressure of degree
/// `degree - 1`) never receive global indices; they are eliminated cell by
/// cell.  Every trace facet (interior or boundary) carries three blocks of n2
/// scalar coefficients: x-velocity, y-velocity, pressure, in that local
/// order.  Velocity blocks on Dirichlet facets are constrained to projected
/// boundary data (global index -1, value in facet_dof_value).
///
/// When the problem has no Neumann facet the pressure is determined only up
/// to a finite-dimensional gauge.  Because every prism is cut the same way,
/// the gauge modes have a universal "class" form: each cell carries a
/// polynomial in slab time that depends only on how many of the cell's
/// corners lie on the top level, and each trace facet likewise (one or two
/// top corners).  All such tetrahedra are affinely equivalent through
/// time-preserving maps, so the mode space is independent of the geometry; it
/// has dimension degree + 2 and contains the global time polynomials of
/// degree <= degree - 1.  build_layout computes this space once per slab from
/// a single prism, stores it in pressure_gauge_modes, and pins degree + 2
/// trace pressure coefficients — chosen by column pivoting to be unisolvent
/// on the mode space — to zero.  Global numbering puts all free velocity
/// trace dofs first, then all pressure trace dofs.
struct DofLayout {
  int degree = 0;
  int n3 = 0;   ///< scalar cell velocity block size
  int n3p = 0;  ///< cell pressure block size
  int n2 = 0;   ///< scalar facet block size

  std::vector<int> qfacet_of_facet;    ///< facet id -> trace slot, -1 for bottom/top
  std::vector<int> facet_of_qfacet;    ///< trace slot -> facet id
  std::vector<char> qfacet_dirichlet;  ///< 1 when the facet velocity is constrained
  Eigen::MatrixXi facet_dof_global;    ///< nq x 3*n2 global ids, -1 = constrained
  Eigen::MatrixXd facet_dof_value;     ///< nq x 3*n2 constrained values, else 0
  int num_global = 0;
  int num_velocity_global = 0;
  bool pressure_pinned = false;

  /// Pressure gauge basis of an all-Dirichlet slab, one mode per row, as
  /// monomial coefficients in the normalized slab time tau = (t - t0)/(t1 -
  /// t0).  Column layout: trace pressure on one-top-corner facets (degree + 1
  /// coefficients), trace pressure on two-top-corner facets (degree + 1),
  /// then cell pressure on cells with 1, 2, 3 top corners (degree each).
  /// Empty unless pressure_pinned.
  Eigen::MatrixXd pressure_gauge_modes;

  int cell_block() const { return 2 * n3 + n3p; }
  int facet_block() const { return 3 * n2; }
  int num_qfacets() const { return static_cast<int>(facet_of_qfacet.size()); }
};

/// Builds the trace numbering for `mesh` at polynomial degree `degree`
/// (1..4).  `bc_of_tag` assigns a boundary kind to every boundary tag.
DofLayout build_layout(const SlabMesh& mesh, int degree,
                       const std::function<BoundaryKind(int)>& bc_of_tag);

/// Pressure gauge basis of an all-Dirichlet slab: the modes with zero
/// velocity that annihilate every row of the slab system.  One mode per row;
/// see DofLayout::pressure_gauge_modes for the column layout.  Computed from
/// the first prism of the mesh; by affine equivalence of the prism
/// subdivision the result is exact for every prism.
Eigen::MatrixXd pressure_gauge_basis(const SlabMesh& mesh, int degree);

/// Fills the constrained velocity values by facet-wise L2 projection of
/// `u_dirichlet` (a function of the space-time point) onto each Dirichlet
/// facet's trace space.
void set_dirichlet_values(
    DofLayout& layout, const SlabMesh& mesh,
    const std::function<Eigen::Vector2d(const Eigen::Vector3d&)>& u_dirichlet);

}  // namespace sthdg

#endif  // STHDG_DOF_LAYOUT_HPP
