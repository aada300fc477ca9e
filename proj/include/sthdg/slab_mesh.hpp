#ifndef STHDG_SLAB_MESH_HPP
#define STHDG_SLAB_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "sthdg/basis.hpp"
#include "sthdg/geometry.hpp"

namespace sthdg {

/// Role of a facet of the slab mesh.
///
/// Bottom and Top facets are the horizontal faces at the start and end of the
/// slab (time-normal is exactly -1 / +1).  Interior and Boundary facets carry
/// trace unknowns; Boundary facets lie on the lateral surface swept by the
/// domain boundary and carry the tag of their spatial edge.
enum class FacetKind { Bottom, Top, Interior, Boundary };

/// Triangular facet of the slab mesh in canonical form.
///
/// `verts` holds the three slab vertex ids sorted ascending; `unit_normal` is
/// computed once from that canonical order, so both adjacent cells see the
/// identical normal vector and quadrature frame.  `sign0`/`sign1` give the
/// orientation of the canonical normal relative to the outward normal of
/// `cell0`/`cell1` (outward = sign * canonical), and are exactly opposite on
/// interior facets.
struct Facet {
  std::array<int, 3> verts{-1, -1, -1};
  int cell0 = -1;
  int cell1 = -1;
  double sign0 = 0.0;
  double sign1 = 0.0;
  FacetKind kind = FacetKind::Interior;
  Eigen::Vector3d unit_normal = Eigen::Vector3d::Zero();  ///< (n_x, n_y, n_t)
  double area = 0.0;                                      ///< physical 2D measure
  int spatial_triangle = -1;  ///< owning triangle for Bottom/Top facets, else -1
  int boundary_tag = -1;      ///< spatial edge tag for Boundary facets, else -1

  bool carries_trace() const {
    return kind == FacetKind::Interior || kind == FacetKind::Boundary;
  }
};

/// Tetrahedral cell of the slab mesh.
struct SpaceTimeCell {
  std::array<int, 4> verts{-1, -1, -1, -1};  ///< slab vertex ids, positive orientation
  int triangle = -1;                         ///< spatial triangle this cell extrudes
};

/// Tetrahedral decomposition of one space-time slab.
///
/// Each spatial triangle sweeps a prism between its positions at t0 and t1
/// (vertices move on straight lines); the prism is cut into three tetrahedra
/// using the diagonals that emanate from the smallest vertex id of each
/// lateral face, which makes the decomposition conforming across prisms.
/// Slab vertex ids: spatial vertex v sits at id v on the bottom level and at
/// id v + nv on the top level.
struct SlabMesh {
  double t0 = 0.0;
  double t1 = 0.0;
  int num_spatial_vertices = 0;
  Eigen::MatrixXd vertices;  ///< 2*nv x 3 space-time coordinates (x, y, t)
  std::vector<SpaceTimeCell> cells;
  std::vector<AffineMap> cell_maps;
  std::vector<double> cell_h;  ///< space-time cell diameter (max vertex distance)
  std::vector<Facet> facets;
  std::vector<std::array<int, 4>> cell_facets;  ///< 4 facet ids per cell
  std::vector<int> bottom_facet_of_triangle;    ///< per spatial triangle
  std::vector<int> top_facet_of_triangle;       ///< per spatial triangle

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_facets() const { return static_cast<int>(facets.size()); }

  /// Orientation of facet f relative to cell c (+1/-1); c must be adjacent.
  double facet_sign(int f, int c) const;

  /// Canonical physical vertex positions of facet f (rows, sorted-id order).
  Eigen::Matrix<double, 3, 3> facet_corners(int f) const;
};

/// Builds the slab between times t0 and t1 from the vertex positions at the
/// two levels.  `edges` must come from build_edges(spatial).  Throws
/// DegenerateCell / InconsistentTopology on invalid input.
SlabMesh extrude_slab(const SpatialMesh& spatial, const std::vector<EdgeInfo>& edges,
                      const Eigen::MatrixXd& pos0, const Eigen::MatrixXd& pos1,
                      double t0, double t1);

/// Structural self-checks (facet incidence, orientation, closure of cell
/// boundaries).  Throws InconsistentTopology on failure.  Intended for tests
/// and debug runs; cost is O(cells).
void validate_slab(const SlabMesh& mesh);

/// Number of a cell's corners on the top level of the slab (1, 2, or 3).
/// Identifies the cell's position in the prism subdivision.
int cell_top_corners(const SlabMesh& mesh, int cell);

/// Number of a facet's corners on the top level of the slab (0 for Bottom
/// facets, 3 for Top facets, 1 or 2 for trace facets).
int facet_top_corners(const SlabMesh& mesh, int facet);

}  // namespace sthdg

#endif  // STHDG_SLAB_MESH_HPP
