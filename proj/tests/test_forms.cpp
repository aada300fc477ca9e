#include <cmath>
#include <random>

#include "doctest.h"
#include "sthdg/forms.hpp"
#include "sthdg/linear_system.hpp"

using namespace sthdg;

namespace {

struct FormsFixture {
  SpatialMesh spatial;
  std::vector<EdgeInfo> edges;
  Eigen::MatrixXd pos0, pos1;
  SlabMesh mesh;
  DofLayout layout;
  ReferenceTables ref;

  explicit FormsFixture(int nx, int degree = 2)
      : spatial(uniform_unit_square(nx)),
        edges(build_edges(spatial)),
        pos0(move_vertices(spatial, DomainMotion::traveling_wave(), 0.0)),
        pos1(move_vertices(spatial, DomainMotion::traveling_wave(), 0.05)),
        mesh(extrude_slab(spatial, edges, pos0, pos1, 0.0, 0.05)),
        layout(build_layout(mesh, degree, [](int) { return BoundaryKind::Neumann; })),
        ref(degree) {}
};

Eigen::MatrixXd facet_phys_points(const Eigen::Matrix3d& corners,
                                  const Eigen::MatrixXd& ref_pts) {
  Eigen::MatrixXd X(ref_pts.rows(), 3);
  for (Eigen::Index q = 0; q < ref_pts.rows(); ++q)
    X.row(q) = (1.0 - ref_pts(q, 0) - ref_pts(q, 1)) * corners.row(0) +
               ref_pts(q, 0) * corners.row(1) + ref_pts(q, 1) * corners.row(2);
  return X;
}

Eigen::MatrixXd pull_to_cell(const AffineMap& map, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd xi(X.rows(), 3);
  for (Eigen::Index q = 0; q < X.rows(); ++q)
    xi.row(q) = (map.Ainv * (X.row(q).transpose() - map.b)).transpose();
  return xi;
}

/// L2 projection of analytic fields onto the cell and facet coefficient
/// vectors (exact for polynomial inputs up to the space degree).
SlabState project_state(const FormsFixture& fx,
                        const std::function<Eigen::Vector2d(const Eigen::Vector3d&)>& u,
                        const std::function<double(const Eigen::Vector3d&)>& p) {
  const DofLayout& L = fx.layout;
  SlabState s = SlabState::zero(fx.mesh.num_cells(), L.num_qfacets(), L);
  const int n3 = L.n3, n3p = L.n3p, n2 = L.n2;
  for (int c = 0; c < fx.mesh.num_cells(); ++c) {
    for (int q = 0; q < fx.ref.vol.size(); ++q) {
      const Eigen::Vector3d X =
          fx.mesh.cell_maps[c].apply(fx.ref.vol.points.row(q).transpose());
      const double w = fx.ref.vol.weights[q];
      const Eigen::Vector2d uv = u ? u(X) : Eigen::Vector2d::Zero();
      const double pv = p ? p(X) : 0.0;
      for (int j = 0; j < n3; ++j) {
        s.cell(c, j) += w * fx.ref.phi(q, j) * uv[0];
        s.cell(c, n3 + j) += w * fx.ref.phi(q, j) * uv[1];
      }
      for (int j = 0; j < n3p; ++j) s.cell(c, 2 * n3 + j) += w * fx.ref.phi(q, j) * pv;
    }
  }
  for (int qf = 0; qf < L.num_qfacets(); ++qf) {
    const int f = L.facet_of_qfacet[qf];
    const Eigen::MatrixXd X =
        facet_phys_points(fx.mesh.facet_corners(f), fx.ref.face.points);
    for (int q = 0; q < fx.ref.face.size(); ++q) {
      // Reference weights only: the reference-orthonormal basis makes the
      // projection independent of the physical facet measure.
      const double w = fx.ref.face.weights[q];
      const Eigen::Vector2d uv = u ? u(X.row(q).transpose()) : Eigen::Vector2d::Zero();
      const double pv = p ? p(X.row(q).transpose()) : 0.0;
      for (int j = 0; j < n2; ++j) {
        s.facet(qf, j) += w * fx.ref.psi(q, j) * uv[0];
        s.facet(qf, n2 + j) += w * fx.ref.psi(q, j) * uv[1];
        s.facet(qf, 2 * n2 + j) += w * fx.ref.psi(q, j) * pv;
      }
    }
  }
  return s;
}

/// Dense unknown vector in the ordering used by assemble_dense.
Eigen::VectorXd flatten(const FormsFixture& fx, const SlabState& s) {
  const int cb = fx.layout.cell_block();
  const int nc = fx.mesh.num_cells();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nc * cb + fx.layout.num_global);
  for (int c = 0; c < nc; ++c) x.segment(c * cb, cb) = s.cell.row(c).transpose();
  for (int q = 0; q < fx.layout.num_qfacets(); ++q)
    for (int j = 0; j < fx.layout.facet_block(); ++j) {
      const int g = fx.layout.facet_dof_global(q, j);
      REQUIRE(g >= 0);  // all-Neumann layout has no constrained dofs
      x[nc * cb + g] = s.facet(q, j);
    }
  return x;
}

SlabState random_state(const FormsFixture& fx, unsigned seed, bool with_pressure) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SlabState s = SlabState::zero(fx.mesh.num_cells(), fx.layout.num_qfacets(), fx.layout);
  const int n3 = fx.layout.n3, n2 = fx.layout.n2;
  const int vc = with_pressure ? fx.layout.cell_block() : 2 * n3;
  const int vf = with_pressure ? fx.layout.facet_block() : 2 * n2;
  for (int c = 0; c < s.cell.rows(); ++c)
    for (int j = 0; j < vc; ++j) s.cell(c, j) = dist(gen);
  for (int q = 0; q < s.facet.rows(); ++q)
    for (int j = 0; j < vf; ++j) s.facet(q, j) = dist(gen);
  return s;
}

ProblemData no_data() { return ProblemData{}; }

}  // namespace

TEST_CASE("projected constants evaluate back to the constant") {
  const FormsFixture fx(2);
  const Eigen::Vector2d cvec(0.7, -0.4);
  const SlabState s = project_state(
      fx, [&](const Eigen::Vector3d&) { return cvec; },
      [](const Eigen::Vector3d&) { return 0.25; });
  // Interior reference points.
  Eigen::MatrixXd pts(2, 3);
  pts << 0.21, 0.11, 0.31, 0.05, 0.55, 0.2;
  const Eigen::MatrixXd V = fx.ref.b3.values(pts);
  for (int c : {0, 5, 11}) {
    const Eigen::VectorXd ux = V * s.cell.row(c).segment(0, fx.layout.n3).transpose();
    const Eigen::VectorXd uy =
        V * s.cell.row(c).segment(fx.layout.n3, fx.layout.n3).transpose();
    const Eigen::VectorXd pv =
        V.leftCols(fx.layout.n3p) * s.cell.row(c).segment(2 * fx.layout.n3, fx.layout.n3p)
                                        .transpose();
    CHECK((ux.array() - cvec[0]).abs().maxCoeff() < 1e-13);
    CHECK((uy.array() - cvec[1]).abs().maxCoeff() < 1e-13);
    CHECK((pv.array() - 0.25).abs().maxCoeff() < 1e-13);
  }
  Eigen::MatrixXd fpts(2, 2);
  fpts << 0.3, 0.3, 0.1, 0.6;
  const Eigen::MatrixXd Psi = fx.ref.b2.values(fpts);
  for (int q : {0, 7, 13}) {
    const Eigen::VectorXd ub =
        Psi * s.facet.row(q).segment(0, fx.layout.n2).transpose();
    CHECK((ub.array() - cvec[0]).abs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("the viscous operator is symmetric and positive semidefinite") {
  const FormsFixture fx(2);
  FormOptions opt;
  opt.nu = 1e-2;
  opt.alpha = 6.0 * 4.0;
  opt.pressure = false;
  opt.transport = false;
  const DenseSystem sys =
      assemble_dense(fx.mesh, fx.layout, fx.ref, opt, nullptr, no_data(), nullptr);
  const double scale = sys.matrix.cwiseAbs().maxCoeff();
  CHECK((sys.matrix - sys.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (sys.matrix + sys.matrix.transpose()), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > -1e-9 * scale);
}

TEST_CASE("the pressure coupling is antisymmetric") {
  const FormsFixture fx(2);
  FormOptions opt;
  opt.viscous = false;
  opt.transport = false;
  const DenseSystem sys =
      assemble_dense(fx.mesh, fx.layout, fx.ref, opt, nullptr, no_data(), nullptr);
  const double scale = sys.matrix.cwiseAbs().maxCoeff();
  CHECK(scale > 0.0);
  CHECK((sys.matrix + sys.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("conforming divergence-free fields annihilate the mass rows") {
  const FormsFixture fx(2);
  FormOptions opt;
  opt.viscous = false;
  opt.transport = false;
  const DenseSystem sys =
      assemble_dense(fx.mesh, fx.layout, fx.ref, opt, nullptr, no_data(), nullptr);
  const auto check_field =
      [&](const std::function<Eigen::Vector2d(const Eigen::Vector3d&)>& u) {
        const SlabState s = project_state(fx, u, nullptr);
        const Eigen::VectorXd x = flatten(fx, s);
        const Eigen::VectorXd residual = sys.matrix * x;
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, x.cwiseAbs().maxCoeff()));
      };
  check_field([](const Eigen::Vector3d&) { return Eigen::Vector2d(1.0, 0.3); });
  check_field([](const Eigen::Vector3d& X) { return Eigen::Vector2d(X[1], X[0]); });
  check_field([](const Eigen::Vector3d& X) {
    return Eigen::Vector2d(0.2 + X[0], 0.9 - X[1]);
  });
}

TEST_CASE("the transport quadratic form matches its boundary representation") {
  // For a conforming constant advecting field the transport form of any
  // coefficient vector equals
  //   1/2 |u|^2 on top + 1/2 |u|^2 on bottom
  //   + sum over cell-sides of trace facets of 1/2 |s| |u - ubar|^2
  //   + sum over outflow-stabilized boundary facets of 1/2 |s| |ubar|^2,
  // obtained by integrating the advective derivative by parts cell by cell.
  const FormsFixture fx(2);
  const Eigen::Vector2d wvec(0.7, -0.4);
  const SlabState wstate = project_state(
      fx, [&](const Eigen::Vector3d&) { return wvec; }, nullptr);

  FormOptions opt;
  opt.viscous = false;
  opt.pressure = false;
  const int n3 = fx.layout.n3, n2 = fx.layout.n2;

  for (unsigned seed = 1; seed <= 10; ++seed) {
    const SlabState s = random_state(fx, seed, true);
    const double qf = quadratic_form(fx.mesh, fx.layout, fx.ref, opt, &wstate, s);

    double rhs = 0.0;
    for (int f = 0; f < fx.mesh.num_facets(); ++f) {
      const Facet& facet = fx.mesh.facets[f];
      const Eigen::MatrixXd X =
          facet_phys_points(fx.mesh.facet_corners(f), fx.ref.face.points);
      const Eigen::VectorXd wq = fx.ref.face.weights * (2.0 * facet.area);

      const auto cell_velocity = [&](int c) {
        const Eigen::MatrixXd Phi =
            fx.ref.b3.values(pull_to_cell(fx.mesh.cell_maps[c], X));
        Eigen::MatrixXd u(X.rows(), 2);
        u.col(0) = Phi * s.cell.row(c).segment(0, n3).transpose();
        u.col(1) = Phi * s.cell.row(c).segment(n3, n3).transpose();
        return u;
      };

      if (facet.kind == FacetKind::Bottom || facet.kind == FacetKind::Top) {
        const Eigen::MatrixXd u = cell_velocity(facet.cell0);
        rhs += 0.5 * (wq.array() * u.array().square().rowwise().sum().array()).sum();
        continue;
      }

      const int q = fx.layout.qfacet_of_facet[f];
      Eigen::MatrixXd ub(X.rows(), 2);
      ub.col(0) = fx.ref.psi * s.facet.row(q).segment(0, n2).transpose();
      ub.col(1) = fx.ref.psi * s.facet.row(q).segment(n2, n2).transpose();

      const double s0 = facet.sign0 * (facet.unit_normal[2] +
                                       wvec[0] * facet.unit_normal[0] +
                                       wvec[1] * facet.unit_normal[1]);
      const int cells[2] = {facet.cell0, facet.cell1};
      const double signed_speed[2] = {s0, -s0};
      for (int side = 0; side < 2; ++side) {
        if (cells[side] == -1) continue;
        const Eigen::MatrixXd u = cell_velocity(cells[side]);
        const Eigen::ArrayXd jump2 = (u - ub).array().square().rowwise().sum();
        rhs += 0.5 * std::abs(signed_speed[side]) * (wq.array() * jump2).sum();
      }
      if (facet.kind == FacetKind::Boundary) {
        const Eigen::ArrayXd ub2 = ub.array().square().rowwise().sum();
        rhs += 0.5 * std::abs(s0) * (wq.array() * ub2).sum();
      }
    }
    CHECK(qf == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("grid-velocity and time-normal formulations assemble identically") {
  // On a slab whose facets are swept by straight vertex trajectories the
  // normal grid speed equals minus the time component of the unit normal, so
  // both formulations must produce bitwise identical local systems.
  const FormsFixture fx(2);
  const SlabState w = random_state(fx, 99, true);
  FormOptions plain, ale;
  plain.nu = ale.nu = 1e-3;
  plain.alpha = ale.alpha = 24.0;
  ale.ale = true;
  CellSystem a, b;
  for (int c = 0; c < fx.mesh.num_cells(); ++c) {
    assemble_cell(fx.mesh, fx.layout, fx.ref, plain, &w, no_data(), nullptr, c, a);
    assemble_cell(fx.mesh, fx.layout, fx.ref, ale, &w, no_data(), nullptr, c, b);
    CHECK((a.A - b.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.B - b.B).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.C - b.C).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.D - b.D).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("the forcing load integrates test functions against the source") {
  const FormsFixture fx(1);
  FormOptions opt;
  ProblemData data;
  data.forcing = [](const Eigen::Vector3d&) { return Eigen::Vector2d(1.0, 2.0); };
  // Coefficients representing the constant 1 in each component.
  const SlabState ones = project_state(
      fx, [](const Eigen::Vector3d&) { return Eigen::Vector2d(1.0, 1.0); }, nullptr);
  CellSystem sys;
  for (int c = 0; c < fx.mesh.num_cells(); ++c) {
    assemble_cell(fx.mesh, fx.layout, fx.ref, opt, nullptr, data, nullptr, c, sys);
    const double vol = fx.mesh.cell_maps[c].detA / 6.0;
    const int n3 = fx.layout.n3;
    const double ix =
        sys.rW.segment(0, n3).dot(ones.cell.row(c).segment(0, n3).transpose());
    const double iy =
        sys.rW.segment(n3, n3).dot(ones.cell.row(c).segment(n3, n3).transpose());
    CHECK(ix == doctest::Approx(1.0 * vol).epsilon(1e-12));
    CHECK(iy == doctest::Approx(2.0 * vol).epsilon(1e-12));
  }
}

TEST_CASE("the quadratic form agrees with the dense operator") {
  const FormsFixture fx(1);
  FormOptions opt;
  opt.nu = 3e-3;
  opt.alpha = 24.0;
  const SlabState w = random_state(fx, 7, true);
  const SlabState s = random_state(fx, 8, true);
  const DenseSystem sys =
      assemble_dense(fx.mesh, fx.layout, fx.ref, opt, &w, no_data(), nullptr);
  const Eigen::VectorXd x = flatten(fx, s);
  const double dense_value = x.dot(sys.matrix * x);
  const double qf = quadratic_form(fx.mesh, fx.layout, fx.ref, opt, &w, s);
  CHECK(qf == doctest::Approx(dense_value).epsilon(1e-12));
}
