#include <array>
#include <cmath>

#include "doctest.h"
#include "sthdg/cases.hpp"
#include "sthdg/errors.hpp"
#include "sthdg/marching.hpp"

using namespace sthdg;

namespace {

/// Canonical (sorted-vertex) affine frame of one triangle.
AffineMap2 canonical_frame(const SpatialMesh& mesh, const Eigen::MatrixXd& positions,
                           int k) {
  std::array<int, 3> s = {mesh.triangles(k, 0), mesh.triangles(k, 1),
                          mesh.triangles(k, 2)};
  std::sort(s.begin(), s.end());
  Eigen::Matrix<double, 3, 2> corners;
  for (int i = 0; i < 3; ++i) corners.row(i) = positions.row(s[i]);
  return AffineMap2::from_triangle_any(corners);
}

double max_trace_error(const SpatialMesh& mesh, const Eigen::MatrixXd& positions,
                       const TraceField& trace,
                       const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u0) {
  const BasisSet b2(2, trace.degree);
  const int n2 = b2.size();
  Eigen::MatrixXd pts(4, 2);
  pts << 0.2, 0.2, 0.6, 0.1, 0.15, 0.55, 1.0 / 3.0, 1.0 / 3.0;
  const Eigen::MatrixXd Psi = b2.values(pts);
  double err = 0.0;
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const AffineMap2 map = canonical_frame(mesh, positions, k);
    const Eigen::VectorXd ux = Psi * trace.coeffs.row(k).segment(0, n2).transpose();
    const Eigen::VectorXd uy = Psi * trace.coeffs.row(k).segment(n2, n2).transpose();
    for (int q = 0; q < pts.rows(); ++q) {
      const Eigen::Vector2d exact = u0(map.apply(pts.row(q).transpose()));
      err = std::max(err, std::abs(ux[q] - exact[0]));
      err = std::max(err, std::abs(uy[q] - exact[1]));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("boundary-kind lookup rejects unknown tags") {
  const std::map<int, BoundaryKind> table = {{0, BoundaryKind::Dirichlet}};
  const auto fn = bc_lookup(table);
  CHECK(fn(0) == BoundaryKind::Dirichlet);
  CHECK_THROWS_AS(fn(1), InconsistentTopology);
}

TEST_CASE("initial projection reproduces divergence-free polynomial data") {
  const SpatialMesh mesh = uniform_unit_square(2);
  const std::vector<EdgeInfo> edges = build_edges(mesh);
  const Eigen::MatrixXd positions =
      move_vertices(mesh, DomainMotion::traveling_wave(), 0.3);

  SUBCASE("quadratic solenoidal field") {
    const auto u0 = [](const Eigen::Vector2d& x) {
      return Eigen::Vector2d(x[0] * x[0], -2.0 * x[0] * x[1]);
    };
    const TraceField trace = project_initial(mesh, edges, positions, 2, u0);
    CHECK(max_trace_error(mesh, positions, trace, u0) < 1e-10);
  }
  SUBCASE("constant field") {
    const auto u0 = [](const Eigen::Vector2d&) { return Eigen::Vector2d(1.0, 2.0); };
    const TraceField trace = project_initial(mesh, edges, positions, 2, u0);
    CHECK(max_trace_error(mesh, positions, trace, u0) < 1e-12);
  }
  SUBCASE("null input gives the zero trace") {
    const TraceField trace = project_initial(mesh, edges, positions, 2, nullptr);
    CHECK(trace.coeffs.cwiseAbs().maxCoeff() == 0.0);
    CHECK(trace.coeffs.rows() == mesh.num_triangles());
  }
  SUBCASE("a compressible input is rejected") {
    const auto bad = [](const Eigen::Vector2d& x) { return x; };
    CHECK_THROWS_AS(project_initial(mesh, edges, positions, 2, bad),
                    InvalidInitialCondition);
  }
}

TEST_CASE("trace energy uses the physical triangle areas") {
  const SpatialMesh mesh = uniform_unit_square(2);
  const std::vector<EdgeInfo> edges = build_edges(mesh);
  const Eigen::MatrixXd positions = mesh.vertices;
  const auto u0 = [](const Eigen::Vector2d&) { return Eigen::Vector2d(3.0, 4.0); };
  const TraceField trace = project_initial(mesh, edges, positions, 2, u0);
  const Eigen::VectorXd areas = triangle_areas(mesh, positions);
  CHECK(areas.sum() == doctest::Approx(1.0).epsilon(1e-14));
  // |u|^2 = 25 on the unit square.
  CHECK(trace.energy(areas) == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("a uniform flow is reproduced and converges immediately") {
  const CaseSetup setup = make_case("uniform-flow", 2, 1e-4);
  MarchOptions opt;
  opt.degree = 2;
  opt.dt = 0.05;
  opt.num_slabs = 3;
  opt.nu = 1e-4;
  const MarchSummary summary = march(setup.problem, opt);

  REQUIRE(summary.slabs.size() == 3);
  REQUIRE(summary.trace_energy.size() == 4);
  for (const SlabResult& r : summary.slabs) {
    CHECK(r.iterations >= 2);
    CHECK(r.iterations <= 3);
    CHECK(r.condensed_residual <= 1e-11);
  }
  const auto cfun = [](const Eigen::Vector2d&) { return Eigen::Vector2d(1.0, 0.3); };
  CHECK(max_trace_error(setup.problem.mesh, summary.final_positions, summary.final_trace,
                        cfun) < 1e-10);
  // Energy tracks |c|^2 times the (deformed) domain area at each level.
  const double area =
      triangle_areas(setup.problem.mesh, summary.final_positions).sum();
  CHECK(summary.trace_energy.back() == doctest::Approx(1.09 * area).epsilon(1e-10));
}

TEST_CASE("the final trace matches an independent surface integral") {
  const CaseSetup setup = make_case("manufactured", 2, 1e-3);
  MarchOptions opt;
  opt.degree = 2;
  opt.dt = 0.05;
  opt.num_slabs = 1;
  opt.nu = 1e-3;

  SlabMesh last_mesh;
  SlabState last_state;
  const MarchSummary summary = march(
      setup.problem, opt,
      [&](const SlabMesh& mesh, const DofLayout&, const ReferenceTables&,
          const SlabState& state, const SlabResult&) {
        last_mesh = mesh;
        last_state = state;
      });

  // Direct integral of |u_h|^2 over the top of the slab.
  const ReferenceTables ref(2);
  const int n3 = ref.b3.size();
  double direct = 0.0;
  for (int fid : last_mesh.top_facet_of_triangle) {
    const Facet& f = last_mesh.facets[fid];
    const AffineMap& map = last_mesh.cell_maps[f.cell0];
    const auto corners = last_mesh.facet_corners(fid);
    for (int q = 0; q < ref.face.size(); ++q) {
      const Eigen::Vector3d X = ((1.0 - ref.face.points(q, 0) - ref.face.points(q, 1)) *
                                     corners.row(0) +
                                 ref.face.points(q, 0) * corners.row(1) +
                                 ref.face.points(q, 1) * corners.row(2))
                                    .transpose();
      const Eigen::Vector3d xi = map.Ainv * (X - map.b);
      const Eigen::RowVectorXd phi = ref.b3.values(xi.transpose());
      const double u1 = phi.dot(last_state.cell.row(f.cell0).segment(0, n3));
      const double u2 = phi.dot(last_state.cell.row(f.cell0).segment(n3, n3));
      direct += 2.0 * f.area * ref.face.weights[q] * (u1 * u1 + u2 * u2);
    }
  }
  const double via_trace = summary.final_trace.energy(
      triangle_areas(setup.problem.mesh, summary.final_positions));
  CHECK(via_trace == doctest::Approx(direct).epsilon(1e-12));
  CHECK(summary.trace_energy.back() == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("the fixed-point iteration reports failure to converge") {
  const CaseSetup setup = make_case("manufactured", 2, 1e-4);
  MarchOptions opt;
  opt.degree = 2;
  opt.dt = 0.05;
  opt.num_slabs = 1;
  opt.nu = 1e-4;
  opt.max_iterations = 1;
  opt.tol = 1e-14;
  CHECK_THROWS_AS(march(setup.problem, opt), NoConvergence);
}
