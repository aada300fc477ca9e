#ifndef STHDG_GEOMETRY_HPP
#define STHDG_GEOMETRY_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace sthdg {

/// Planar triangulation with tagged boundary edges.
///
/// Triangles are stored counterclockwise.  Boundary edges carry integer tags
/// that the driver maps to boundary-condition kinds.
struct SpatialMesh {
  Eigen::MatrixXd vertices;        ///< nv x 2 vertex coordinates
  Eigen::MatrixXi triangles;       ///< nt x 3 vertex ids, CCW
  Eigen::MatrixXi boundary_edges;  ///< nb x 2 vertex ids
  std::vector<int> boundary_tags;  ///< nb tags, parallel to boundary_edges

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_triangles() const { return static_cast<int>(triangles.rows()); }
};

/// Edge of the spatial triangulation with adjacency information.
struct EdgeInfo {
  int v0 = -1;    ///< smaller vertex id
  int v1 = -1;    ///< larger vertex id
  int tri0 = -1;  ///< first adjacent triangle
  int tri1 = -1;  ///< second adjacent triangle, -1 on the boundary
  int tag = -1;   ///< boundary tag, -1 for interior edges
};

/// Builds the unique edge list of a mesh and attaches boundary tags.
///
/// Throws InconsistentTopology if an edge is shared by more than two
/// triangles, if a boundary edge of the triangulation is missing from the
/// tagged list, or if a tagged edge is interior.
std::vector<EdgeInfo> build_edges(const SpatialMesh& mesh);

/// Uniform triangulation of the unit square with nx x nx cells, each split
/// along the (i,j)-(i+1,j+1) diagonal.  Boundary tags: 0 bottom (y=0),
/// 1 right (x=1), 2 top (y=1), 3 left (x=0).
SpatialMesh uniform_unit_square(int nx);

/// Reads a mesh from an ASCII file:
///   nv
///   x y            (nv lines)
///   nt
///   i j k          (nt lines, CCW)
///   nb
///   i j tag        (nb lines)
SpatialMesh read_mesh(const std::string& path);

/// Prescribed motion of the spatial domain.  Both fields are functions of the
/// reference position (the vertex coordinates of the undeformed mesh) and
/// time; `velocity` must be the exact time derivative of `position`.
struct DomainMotion {
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)> position;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)> velocity;

  /// Identity motion: the domain does not move.
  static DomainMotion none();

  /// Smooth traveling-wave deformation of the unit square.  Each coordinate
  /// oscillates with amplitude 0.05*(1-x_i), phase driven by the opposite
  /// reference coordinate, so the lines x=1 and y=1 are invariant (vertices
  /// slide along them) while the interior and the other edges sway.
  static DomainMotion traveling_wave();
};

/// Positions of all mesh vertices under `motion` at time t.  Throws
/// InvalidMotion if any triangle is tangled (non-positive signed area).
Eigen::MatrixXd move_vertices(const SpatialMesh& mesh, const DomainMotion& motion,
                              double t);

/// Velocities of all mesh vertices under `motion` at time t.
Eigen::MatrixXd vertex_velocities(const SpatialMesh& mesh, const DomainMotion& motion,
                                  double t);

/// Twice the signed area of triangle (a, b, c).
double signed_area2(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c);

}  // namespace sthdg

#endif  // STHDG_GEOMETRY_HPP
