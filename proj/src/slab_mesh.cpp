#include "sthdg/slab_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sthdg/errors.hpp"

namespace sthdg {

double SlabMesh::facet_sign(int f, int c) const {
  const Facet& facet = facets[f];
  if (facet.cell0 == c) return facet.sign0;
  if (facet.cell1 == c) return facet.sign1;
  throw InconsistentTopology("facet_sign: cell not adjacent to facet");
}

Eigen::Matrix<double, 3, 3> SlabMesh::facet_corners(int f) const {
  Eigen::Matrix<double, 3, 3> P;
  for (int i = 0; i < 3; ++i) P.row(i) = vertices.row(facets[f].verts[i]);
  return P;
}

namespace {

// Tetrahedron with vertices in intended positive orientation; the last two
// entries are swapped if the physical map comes out inverted.
SpaceTimeCell make_cell(int v0, int v1, int v2, int v3, int triangle) {
  SpaceTimeCell cell;
  cell.verts = {v0, v1, v2, v3};
  cell.triangle = triangle;
  return cell;
}

double tet_diameter(const Eigen::MatrixXd& verts, const std::array<int, 4>& ids) {
  double h = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      h = std::max(h, (verts.row(ids[i]) - verts.row(ids[j])).norm());
  return h;
}

}  // namespace

SlabMesh extrude_slab(const SpatialMesh& spatial, const std::vector<EdgeInfo>& edges,
                      const Eigen::MatrixXd& pos0, const Eigen::MatrixXd& pos1,
                      double t0, double t1) {
  const int nv = spatial.num_vertices();
  const int nt = spatial.num_triangles();
  if (!(t1 > t0)) throw Error("extrude_slab: slab must have positive duration");
  if (pos0.rows() != nv || pos1.rows() != nv)
    throw Error("extrude_slab: vertex position arrays do not match the mesh");

  SlabMesh mesh;
  mesh.t0 = t0;
  mesh.t1 = t1;
  mesh.num_spatial_vertices = nv;
  mesh.vertices.resize(2 * nv, 3);
  for (int v = 0; v < nv; ++v) {
    mesh.vertices.row(v) << pos0(v, 0), pos0(v, 1), t0;
    mesh.vertices.row(v + nv) << pos1(v, 0), pos1(v, 1), t1;
  }

  mesh.cells.reserve(3 * nt);
  mesh.cell_maps.reserve(3 * nt);
  mesh.cell_h.reserve(3 * nt);
  for (int k = 0; k < nt; ++k) {
    // Sort the triangle's vertex ids; the diagonal of every lateral prism
    // face then runs from the face's smallest id to the opposite top corner,
    // which matches between neighboring prisms.
    std::array<int, 3> s = {spatial.triangles(k, 0), spatial.triangles(k, 1),
                            spatial.triangles(k, 2)};
    std::sort(s.begin(), s.end());
    const int a0 = s[0], b0 = s[1], c0 = s[2];
    const int a1 = a0 + nv, b1 = b0 + nv, c1 = c0 + nv;
    mesh.cells.push_back(make_cell(a0, b0, c0, c1, k));
    mesh.cells.push_back(make_cell(a0, b0, c1, b1, k));
    mesh.cells.push_back(make_cell(a0, a1, b1, c1, k));
  }

  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    SpaceTimeCell& cell = mesh.cells[c];
    Eigen::Matrix<double, 4, 3> verts;
    for (int i = 0; i < 4; ++i) verts.row(i) = mesh.vertices.row(cell.verts[i]);
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i) A.col(i) = (verts.row(i + 1) - verts.row(0)).transpose();
    if (A.determinant() < 0.0) {
      std::swap(cell.verts[2], cell.verts[3]);
      verts.row(2) = mesh.vertices.row(cell.verts[2]);
      verts.row(3) = mesh.vertices.row(cell.verts[3]);
    }
    try {
      mesh.cell_maps.push_back(AffineMap::from_tet(verts));
    } catch (const DegenerateMap&) {
      std::ostringstream msg;
      msg << "space-time cell " << c << " is degenerate in slab [" << t0 << ", " << t1
          << "]";
      throw DegenerateCell(msg.str());
    }
    mesh.cell_h.push_back(tet_diameter(mesh.vertices, cell.verts));
  }

  // Collect facets keyed by their sorted vertex triple.
  std::map<std::array<int, 3>, int> facet_index;
  mesh.cell_facets.assign(mesh.cells.size(), {-1, -1, -1, -1});
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& cv = mesh.cells[c].verts;
    for (int l = 0; l < 4; ++l) {
      std::array<int, 3> tri;
      int m = 0;
      for (int i = 0; i < 4; ++i)
        if (i != l) tri[m++] = cv[i];
      std::sort(tri.begin(), tri.end());
      auto it = facet_index.find(tri);
      int f;
      if (it == facet_index.end()) {
        f = mesh.num_facets();
        facet_index.emplace(tri, f);
        Facet facet;
        facet.verts = tri;
        facet.cell0 = c;
        mesh.facets.push_back(facet);
      } else {
        f = it->second;
        Facet& facet = mesh.facets[f];
        if (facet.cell1 != -1)
          throw InconsistentTopology("facet shared by more than two cells");
        facet.cell1 = c;
      }
      mesh.cell_facets[c][l] = f;
    }
  }

  // Canonical geometry and orientation signs.
  for (int f = 0; f < mesh.num_facets(); ++f) {
    Facet& facet = mesh.facets[f];
    const Eigen::Vector3d p0 = mesh.vertices.row(facet.verts[0]);
    const Eigen::Vector3d p1 = mesh.vertices.row(facet.verts[1]);
    const Eigen::Vector3d p2 = mesh.vertices.row(facet.verts[2]);
    const Eigen::Vector3d cross = (p1 - p0).cross(p2 - p0);
    const double norm = cross.norm();
    if (!(norm > 0.0)) throw DegenerateCell("zero-area facet");
    facet.unit_normal = cross / norm;
    facet.area = 0.5 * norm;
    const Eigen::Vector3d fc = (p0 + p1 + p2) / 3.0;
    auto orient = [&](int c) {
      Eigen::Vector3d cc = Eigen::Vector3d::Zero();
      for (int i = 0; i < 4; ++i) cc += mesh.vertices.row(mesh.cells[c].verts[i]).transpose();
      cc /= 4.0;
      return facet.unit_normal.dot(fc - cc) > 0.0 ? 1.0 : -1.0;
    };
    facet.sign0 = orient(facet.cell0);
    if (facet.cell1 != -1) facet.sign1 = orient(facet.cell1);
  }

  // Classification.  Two-sided facets are interior.  One-sided facets are the
  // slab bottom/top (all vertices on one time level) or lie on the lateral
  // boundary surface, in which case their vertices project onto exactly two
  // spatial vertices forming a tagged boundary edge.
  std::map<std::pair<int, int>, const EdgeInfo*> boundary_edge;
  for (const EdgeInfo& e : edges)
    if (e.tri1 == -1) boundary_edge[{e.v0, e.v1}] = &e;

  mesh.bottom_facet_of_triangle.assign(nt, -1);
  mesh.top_facet_of_triangle.assign(nt, -1);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    Facet& facet = mesh.facets[f];
    if (facet.cell1 != -1) {
      facet.kind = FacetKind::Interior;
      continue;
    }
    const bool all_bottom = facet.verts[2] < nv;
    const bool all_top = facet.verts[0] >= nv;
    if (all_bottom || all_top) {
      facet.kind = all_bottom ? FacetKind::Bottom : FacetKind::Top;
      facet.spatial_triangle = mesh.cells[facet.cell0].triangle;
      auto& slot = all_bottom ? mesh.bottom_facet_of_triangle[facet.spatial_triangle]
                              : mesh.top_facet_of_triangle[facet.spatial_triangle];
      if (slot != -1) throw InconsistentTopology("triangle with two bottom/top facets");
      slot = f;
      continue;
    }
    facet.kind = FacetKind::Boundary;
    std::array<int, 3> sv;
    for (int i = 0; i < 3; ++i) sv[i] = facet.verts[i] % nv;
    std::sort(sv.begin(), sv.end());
    // Exactly one spatial vertex appears twice (bottom and top copy); the
    // facet then lies over the spatial edge between the two distinct ids.
    int u0, u1;
    if (sv[0] == sv[1] && sv[1] != sv[2]) {
      u0 = sv[0];
      u1 = sv[2];
    } else if (sv[0] != sv[1] && sv[1] == sv[2]) {
      u0 = sv[0];
      u1 = sv[1];
    } else {
      throw InconsistentTopology("one-sided facet does not project onto an edge");
    }
    auto it = boundary_edge.find({u0, u1});
    if (it == boundary_edge.end())
      throw InconsistentTopology("lateral facet not over a boundary edge");
    facet.boundary_tag = it->second->tag;
  }

  for (int k = 0; k < nt; ++k)
    if (mesh.bottom_facet_of_triangle[k] == -1 || mesh.top_facet_of_triangle[k] == -1)
      throw InconsistentTopology("triangle missing bottom or top facet");

  return mesh;
}

void validate_slab(const SlabMesh& mesh) {
  // Each cell's four facets must close up: sum of outward-oriented facet
  // normal vectors weighted by area vanishes, and the facet ids must be
  // mutually distinct.
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double scale = 0.0;
    const auto& fs = mesh.cell_facets[c];
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (fs[i] == fs[j]) throw InconsistentTopology("cell with repeated facet");
    for (int f : fs) {
      const Facet& facet = mesh.facets[f];
      if (facet.cell0 != c && facet.cell1 != c)
        throw InconsistentTopology("cell_facets points to non-adjacent facet");
      sum += mesh.facet_sign(f, c) * facet.area * facet.unit_normal;
      scale += facet.area;
    }
    if (sum.norm() > 1e-12 * scale)
      throw InconsistentTopology("cell boundary does not close");
  }
  for (const Facet& facet : mesh.facets) {
    if (facet.cell0 == -1) throw InconsistentTopology("facet without a cell");
    if (facet.cell1 != -1) {
      if (facet.sign0 * facet.sign1 != -1.0)
        throw InconsistentTopology("interior facet signs are not opposite");
      if (facet.kind != FacetKind::Interior)
        throw InconsistentTopology("two-sided facet not marked interior");
    } else if (facet.kind == FacetKind::Interior) {
      throw InconsistentTopology("one-sided facet marked interior");
    }
    if (facet.kind == FacetKind::Bottom && facet.sign0 * facet.unit_normal[2] >= 0.0)
      throw InconsistentTopology("bottom facet normal does not point down");
    if (facet.kind == FacetKind::Top && facet.sign0 * facet.unit_normal[2] <= 0.0)
      throw InconsistentTopology("top facet normal does not point up");
  }
}

int cell_top_corners(const SlabMesh& mesh, int cell) {
  int n = 0;
  for (int v : mesh.cells[cell].verts)
    if (v >= mesh.num_spatial_vertices) ++n;
  return n;
}

int facet_top_corners(const SlabMesh& mesh, int facet) {
  int n = 0;
  for (int v : mesh.facets[facet].verts)
    if (v >= mesh.num_spatial_vertices) ++n;
  return n;
}

}  // namespace sthdg
