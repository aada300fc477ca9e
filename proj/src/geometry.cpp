#include "sthdg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sthdg/errors.hpp"

namespace sthdg {

double signed_area2(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

std::vector<EdgeInfo> build_edges(const SpatialMesh& mesh) {
  std::map<std::pair<int, int>, int> index;  // sorted pair -> edge id
  std::vector<EdgeInfo> edges;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = mesh.triangles(t, e);
      int b = mesh.triangles(t, (e + 1) % 3);
      auto key = std::minmax(a, b);
      auto it = index.find(key);
      if (it == index.end()) {
        EdgeInfo info;
        info.v0 = key.first;
        info.v1 = key.second;
        info.tri0 = t;
        index.emplace(key, static_cast<int>(edges.size()));
        edges.push_back(info);
      } else {
        EdgeInfo& info = edges[it->second];
        if (info.tri1 != -1)
          throw InconsistentTopology("edge shared by more than two triangles");
        info.tri1 = t;
      }
    }
  }
  for (size_t i = 0; i < mesh.boundary_tags.size(); ++i) {
    auto key = std::minmax(mesh.boundary_edges(static_cast<int>(i), 0),
                           mesh.boundary_edges(static_cast<int>(i), 1));
    auto it = index.find(key);
    if (it == index.end())
      throw InconsistentTopology("tagged edge is not an edge of the mesh");
    EdgeInfo& info = edges[it->second];
    if (info.tri1 != -1)
      throw InconsistentTopology("tagged edge is interior");
    info.tag = mesh.boundary_tags[i];
  }
  for (const EdgeInfo& e : edges) {
    if (e.tri1 == -1 && e.tag == -1)
      throw InconsistentTopology("boundary edge without a tag");
  }
  return edges;
}

SpatialMesh uniform_unit_square(int nx) {
  if (nx < 1) throw Error("uniform_unit_square: nx must be positive");
  SpatialMesh mesh;
  const int nv = (nx + 1) * (nx + 1);
  mesh.vertices.resize(nv, 2);
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= nx; ++j)
    for (int i = 0; i <= nx; ++i) {
      mesh.vertices(vid(i, j), 0) = static_cast<double>(i) / nx;
      mesh.vertices(vid(i, j), 1) = static_cast<double>(j) / nx;
    }
  mesh.triangles.resize(2 * nx * nx, 3);
  int t = 0;
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i) {
      // Split along the (i,j)-(i+1,j+1) diagonal, both triangles CCW.
      mesh.triangles.row(t++) << vid(i, j), vid(i + 1, j), vid(i + 1, j + 1);
      mesh.triangles.row(t++) << vid(i, j), vid(i + 1, j + 1), vid(i, j + 1);
    }
  mesh.boundary_edges.resize(4 * nx, 2);
  mesh.boundary_tags.resize(4 * nx);
  int b = 0;
  for (int i = 0; i < nx; ++i) {  // bottom, y=0
    mesh.boundary_edges.row(b) << vid(i, 0), vid(i + 1, 0);
    mesh.boundary_tags[b++] = 0;
  }
  for (int j = 0; j < nx; ++j) {  // right, x=1
    mesh.boundary_edges.row(b) << vid(nx, j), vid(nx, j + 1);
    mesh.boundary_tags[b++] = 1;
  }
  for (int i = 0; i < nx; ++i) {  // top, y=1
    mesh.boundary_edges.row(b) << vid(i, nx), vid(i + 1, nx);
    mesh.boundary_tags[b++] = 2;
  }
  for (int j = 0; j < nx; ++j) {  // left, x=0
    mesh.boundary_edges.row(b) << vid(0, j), vid(0, j + 1);
    mesh.boundary_tags[b++] = 3;
  }
  return mesh;
}

SpatialMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file: " + path);
  auto fail = [&path](const std::string& what) -> Error {
    return Error("malformed mesh file " + path + ": " + what);
  };
  int nv = 0;
  if (!(in >> nv) || nv < 3) throw fail("vertex count");
  SpatialMesh mesh;
  mesh.vertices.resize(nv, 2);
  for (int i = 0; i < nv; ++i)
    if (!(in >> mesh.vertices(i, 0) >> mesh.vertices(i, 1)))
      throw fail("vertex coordinates");
  int nt = 0;
  if (!(in >> nt) || nt < 1) throw fail("triangle count");
  mesh.triangles.resize(nt, 3);
  for (int t = 0; t < nt; ++t) {
    for (int e = 0; e < 3; ++e) {
      int v = 0;
      if (!(in >> v) || v < 0 || v >= nv) throw fail("triangle vertex id");
      mesh.triangles(t, e) = v;
    }
    Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
    Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
    Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
    if (signed_area2(a, b, c) <= 0.0) throw fail("triangle not CCW");
  }
  int nb = 0;
  if (!(in >> nb) || nb < 1) throw fail("boundary edge count");
  mesh.boundary_edges.resize(nb, 2);
  mesh.boundary_tags.resize(nb);
  for (int e = 0; e < nb; ++e) {
    int a = 0, b = 0, tag = 0;
    if (!(in >> a >> b >> tag) || a < 0 || a >= nv || b < 0 || b >= nv)
      throw fail("boundary edge");
    mesh.boundary_edges.row(e) << a, b;
    mesh.boundary_tags[e] = tag;
  }
  build_edges(mesh);  // validates connectivity and tagging
  return mesh;
}

DomainMotion DomainMotion::none() {
  DomainMotion m;
  m.position = [](const Eigen::Vector2d& x0, double) { return x0; };
  m.velocity = [](const Eigen::Vector2d&, double) {
    return Eigen::Vector2d::Zero().eval();
  };
  return m;
}

DomainMotion DomainMotion::traveling_wave() {
  constexpr double amp = 0.05;
  constexpr double two_pi = 2.0 * M_PI;
  DomainMotion m;
  m.position = [](const Eigen::Vector2d& x0, double t) {
    Eigen::Vector2d x;
    x[0] = x0[0] + amp * (1.0 - x0[0]) * std::sin(two_pi * (0.5 - x0[1] + t));
    x[1] = x0[1] + amp * (1.0 - x0[1]) * std::sin(two_pi * (0.5 - x0[0] + t));
    return x;
  };
  m.velocity = [](const Eigen::Vector2d& x0, double t) {
    Eigen::Vector2d v;
    v[0] = amp * (1.0 - x0[0]) * two_pi * std::cos(two_pi * (0.5 - x0[1] + t));
    v[1] = amp * (1.0 - x0[1]) * two_pi * std::cos(two_pi * (0.5 - x0[0] + t));
    return v;
  };
  return m;
}

Eigen::MatrixXd move_vertices(const SpatialMesh& mesh, const DomainMotion& motion,
                              double t) {
  Eigen::MatrixXd pos(mesh.num_vertices(), 2);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    pos.row(v) = motion.position(mesh.vertices.row(v), t).transpose();
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    Eigen::Vector2d a = pos.row(mesh.triangles(k, 0));
    Eigen::Vector2d b = pos.row(mesh.triangles(k, 1));
    Eigen::Vector2d c = pos.row(mesh.triangles(k, 2));
    if (signed_area2(a, b, c) <= 0.0) {
      std::ostringstream msg;
      msg << "triangle " << k << " tangled at t=" << t;
      throw InvalidMotion(msg.str());
    }
  }
  return pos;
}

Eigen::MatrixXd vertex_velocities(const SpatialMesh& mesh, const DomainMotion& motion,
                                  double t) {
  Eigen::MatrixXd vel(mesh.num_vertices(), 2);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    vel.row(v) = motion.velocity(mesh.vertices.row(v), t).transpose();
  return vel;
}

}  // namespace sthdg
