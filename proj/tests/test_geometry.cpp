#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "sthdg/errors.hpp"
#include "sthdg/geometry.hpp"

using namespace sthdg;

TEST_CASE("uniform unit square mesh has the expected entity counts") {
  const SpatialMesh m = uniform_unit_square(8);
  CHECK(m.num_vertices() == 81);
  CHECK(m.num_triangles() == 128);
  CHECK(m.boundary_edges.rows() == 32);
  CHECK(m.boundary_tags.size() == 32);

  const SpatialMesh m1 = uniform_unit_square(1);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_triangles() == 2);
  CHECK(m1.boundary_edges.rows() == 4);
}

TEST_CASE("all triangles are counterclockwise and cover the unit square") {
  const SpatialMesh m = uniform_unit_square(8);
  double total = 0.0;
  for (int k = 0; k < m.num_triangles(); ++k) {
    const Eigen::Vector2d a = m.vertices.row(m.triangles(k, 0)).transpose();
    const Eigen::Vector2d b = m.vertices.row(m.triangles(k, 1)).transpose();
    const Eigen::Vector2d c = m.vertices.row(m.triangles(k, 2)).transpose();
    const double s2 = signed_area2(a, b, c);
    CHECK(s2 > 0.0);
    total += 0.5 * s2;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("boundary tags identify the four sides") {
  const SpatialMesh m = uniform_unit_square(4);
  for (int e = 0; e < m.boundary_edges.rows(); ++e) {
    const Eigen::Vector2d p0 = m.vertices.row(m.boundary_edges(e, 0)).transpose();
    const Eigen::Vector2d p1 = m.vertices.row(m.boundary_edges(e, 1)).transpose();
    const int tag = m.boundary_tags[e];
    switch (tag) {
      case 0: CHECK(p0[1] == 0.0); CHECK(p1[1] == 0.0); break;
      case 1: CHECK(p0[0] == 1.0); CHECK(p1[0] == 1.0); break;
      case 2: CHECK(p0[1] == 1.0); CHECK(p1[1] == 1.0); break;
      case 3: CHECK(p0[0] == 0.0); CHECK(p1[0] == 0.0); break;
      default: FAIL("unexpected boundary tag ", tag);
    }
  }
}

TEST_CASE("edge list counts and adjacency are consistent") {
  const SpatialMesh m = uniform_unit_square(8);
  const std::vector<EdgeInfo> edges = build_edges(m);
  CHECK(edges.size() == 208);
  int interior = 0, boundary = 0;
  std::set<std::pair<int, int>> seen;
  for (const EdgeInfo& e : edges) {
    CHECK(e.v0 < e.v1);
    CHECK(seen.insert({e.v0, e.v1}).second);
    CHECK(e.tri0 >= 0);
    if (e.tri1 == -1) {
      ++boundary;
      CHECK(e.tag >= 0);
    } else {
      ++interior;
      CHECK(e.tag == -1);
    }
  }
  CHECK(interior == 176);
  CHECK(boundary == 32);
}

TEST_CASE("build_edges rejects inconsistent boundary data") {
  SpatialMesh m = uniform_unit_square(2);
  SUBCASE("missing tagged boundary edge") {
    m.boundary_edges.conservativeResize(m.boundary_edges.rows() - 1, 2);
    m.boundary_tags.pop_back();
    CHECK_THROWS_AS(build_edges(m), InconsistentTopology);
  }
  SUBCASE("tagging an interior edge") {
    // Find an interior edge and add it to the tagged list.
    const std::vector<EdgeInfo> edges = build_edges(m);
    for (const EdgeInfo& e : edges)
      if (e.tri1 != -1) {
        const int nb = static_cast<int>(m.boundary_edges.rows());
        m.boundary_edges.conservativeResize(nb + 1, 2);
        m.boundary_edges(nb, 0) = e.v0;
        m.boundary_edges(nb, 1) = e.v1;
        m.boundary_tags.push_back(7);
        break;
      }
    CHECK_THROWS_AS(build_edges(m), InconsistentTopology);
  }
}

TEST_CASE("identity motion keeps vertices in place") {
  const SpatialMesh m = uniform_unit_square(4);
  const DomainMotion motion = DomainMotion::none();
  const Eigen::MatrixXd p = move_vertices(m, motion, 0.37);
  CHECK((p - m.vertices).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd v = vertex_velocities(m, motion, 0.37);
  CHECK(v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("traveling-wave velocity is the time derivative of the position") {
  const SpatialMesh m = uniform_unit_square(4);
  const DomainMotion motion = DomainMotion::traveling_wave();
  const double h = 1e-6;
  for (double t : {0.0, 0.13, 0.5, 0.97}) {
    const Eigen::MatrixXd v = vertex_velocities(m, motion, t);
    const Eigen::MatrixXd fd =
        (move_vertices(m, motion, t + h) - move_vertices(m, motion, t - h)) / (2.0 * h);
    CHECK((v - fd).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("traveling wave keeps the far edges invariant") {
  const SpatialMesh m = uniform_unit_square(4);
  const DomainMotion motion = DomainMotion::traveling_wave();
  const Eigen::MatrixXd p = move_vertices(m, motion, 0.31);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.vertices(v, 0) == 1.0) CHECK(p(v, 0) == 1.0);
    if (m.vertices(v, 1) == 1.0) CHECK(p(v, 1) == 1.0);
  }
}

TEST_CASE("a tangling motion is rejected") {
  const SpatialMesh m = uniform_unit_square(2);
  DomainMotion bad;
  bad.position = [](const Eigen::Vector2d& x, double t) {
    return Eigen::Vector2d((1.0 - 2.0 * t) * x[0], x[1]);
  };
  bad.velocity = [](const Eigen::Vector2d& x, double) {
    return Eigen::Vector2d(-2.0 * x[0], 0.0);
  };
  CHECK_NOTHROW(move_vertices(m, bad, 0.1));
  CHECK_THROWS_AS(move_vertices(m, bad, 1.0), InvalidMotion);
}

TEST_CASE("mesh file round trip") {
  const SpatialMesh m = uniform_unit_square(2);
  const std::string path = "roundtrip_mesh.txt";
  {
    std::ofstream out(path);
    out << m.num_vertices() << "\n";
    for (int v = 0; v < m.num_vertices(); ++v)
      out << m.vertices(v, 0) << " " << m.vertices(v, 1) << "\n";
    out << m.num_triangles() << "\n";
    for (int k = 0; k < m.num_triangles(); ++k)
      out << m.triangles(k, 0) << " " << m.triangles(k, 1) << " " << m.triangles(k, 2)
          << "\n";
    out << m.boundary_edges.rows() << "\n";
    for (int e = 0; e < m.boundary_edges.rows(); ++e)
      out << m.boundary_edges(e, 0) << " " << m.boundary_edges(e, 1) << " "
          << m.boundary_tags[e] << "\n";
  }
  const SpatialMesh r = read_mesh(path);
  std::remove(path.c_str());
  REQUIRE(r.num_vertices() == m.num_vertices());
  REQUIRE(r.num_triangles() == m.num_triangles());
  REQUIRE(r.boundary_edges.rows() == m.boundary_edges.rows());
  CHECK((r.vertices - m.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.triangles - m.triangles).cwiseAbs().maxCoeff() == 0);
  CHECK((r.boundary_edges - m.boundary_edges).cwiseAbs().maxCoeff() == 0);
  CHECK(r.boundary_tags == m.boundary_tags);
  CHECK_NOTHROW(build_edges(r));
}

TEST_CASE("read_mesh rejects a missing file") {
  CHECK_THROWS_AS(read_mesh("no_such_mesh_file.txt"), Error);
}
