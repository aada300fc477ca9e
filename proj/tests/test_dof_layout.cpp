#include <set>

#include "doctest.h"
#include "sthdg/dof_layout.hpp"
#include "sthdg/errors.hpp"
#include "sthdg/forms.hpp"

using namespace sthdg;

namespace {

SlabMesh make_slab(int nx, bool moving = true) {
  const SpatialMesh spatial = uniform_unit_square(nx);
  const std::vector<EdgeInfo> edges = build_edges(spatial);
  const DomainMotion motion =
      moving ? DomainMotion::traveling_wave() : DomainMotion::none();
  return extrude_slab(spatial, edges, move_vertices(spatial, motion, 0.0),
                      move_vertices(spatial, motion, 0.05), 0.0, 0.05);
}

BoundaryKind mixed_bc(int tag) {
  return tag == 1 ? BoundaryKind::Neumann : BoundaryKind::Dirichlet;
}

BoundaryKind all_dirichlet(int) { return BoundaryKind::Dirichlet; }

}  // namespace

TEST_CASE("trace numbering counts with an outflow side") {
  const SlabMesh mesh = make_slab(8);
  const DofLayout layout = build_layout(mesh, 2, mixed_bc);
  CHECK(layout.degree == 2);
  CHECK(layout.n3 == 10);
  CHECK(layout.n3p == 4);
  CHECK(layout.n2 == 6);
  CHECK(layout.cell_block() == 24);
  CHECK(layout.facet_block() == 18);
  CHECK(layout.num_qfacets() == 672);
  CHECK(layout.num_global == 11520);
  CHECK(layout.num_velocity_global == 7488);
  CHECK(!layout.pressure_pinned);

  int dirichlet = 0;
  for (char d : layout.qfacet_dirichlet) dirichlet += d != 0;
  CHECK(dirichlet == 48);
}

TEST_CASE("trace numbering pins the pressure gauge without an outflow side") {
  const SlabMesh mesh = make_slab(8);
  const DofLayout layout = build_layout(mesh, 2, all_dirichlet);
  CHECK(layout.pressure_pinned);
  CHECK(layout.num_velocity_global == 7296);
  // The gauge space has dimension k + 2 (time polynomials of degree <= k-1
  // plus two subdivision-class modes), so k + 2 = 4 pressure coefficients are
  // pinned, spread over one facet of each time class.
  CHECK(layout.pressure_gauge_modes.rows() == 4);
  CHECK(layout.num_global == 11324);
  int pinned = 0;
  std::set<int> pin_facets;
  for (int q = 0; q < layout.num_qfacets(); ++q)
    for (int j = 2 * layout.n2; j < 3 * layout.n2; ++j)
      if (layout.facet_dof_global(q, j) == -1) {
        ++pinned;
        pin_facets.insert(q);
      }
  CHECK(pinned == 4);
  CHECK(pin_facets.size() == 2);
  int dirichlet = 0;
  for (char d : layout.qfacet_dirichlet) dirichlet += d != 0;
  CHECK(dirichlet == 64);

  // Degree 3 pins five coefficients.
  const DofLayout cubic = build_layout(mesh, 3, all_dirichlet);
  CHECK(cubic.pressure_gauge_modes.rows() == 5);
  int pinned3 = 0;
  for (int q = 0; q < cubic.num_qfacets(); ++q)
    for (int j = 2 * cubic.n2; j < 3 * cubic.n2; ++j)
      pinned3 += cubic.facet_dof_global(q, j) == -1;
  CHECK(pinned3 == 5);
}

TEST_CASE("global indices form a clean two-block partition") {
  const SlabMesh mesh = make_slab(4);
  for (auto* bc : {&mixed_bc, &all_dirichlet}) {
    const DofLayout layout = build_layout(mesh, 2, *bc);
    std::set<int> seen;
    int constrained = 0;
    for (int q = 0; q < layout.num_qfacets(); ++q) {
      const int f = layout.facet_of_qfacet[q];
      CHECK(layout.qfacet_of_facet[f] == q);
      CHECK(mesh.facets[f].carries_trace());
      for (int j = 0; j < layout.facet_block(); ++j) {
        const int g = layout.facet_dof_global(q, j);
        if (g < 0) {
          ++constrained;
          continue;
        }
        CHECK(seen.insert(g).second);  // no duplicates
        const bool is_velocity = j < 2 * layout.n2;
        if (is_velocity)
          CHECK(g < layout.num_velocity_global);
        else
          CHECK(g >= layout.num_velocity_global);
      }
    }
    CHECK(static_cast<int>(seen.size()) == layout.num_global);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == layout.num_global - 1);

    // Constrained dofs sit exactly on Dirichlet facet velocity blocks, plus
    // one pinned pressure dof per gauge mode when there is no outflow.
    int expected = 0;
    for (int q = 0; q < layout.num_qfacets(); ++q)
      if (layout.qfacet_dirichlet[q]) expected += 2 * layout.n2;
    if (layout.pressure_pinned)
      expected += static_cast<int>(layout.pressure_gauge_modes.rows());
    CHECK(constrained == expected);
  }
}

TEST_CASE("bottom and top facets never carry trace slots") {
  const SlabMesh mesh = make_slab(3);
  const DofLayout layout = build_layout(mesh, 2, mixed_bc);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const bool trace = mesh.facets[f].carries_trace();
    CHECK((layout.qfacet_of_facet[f] >= 0) == trace);
  }
}

TEST_CASE("numbering is deterministic") {
  const SlabMesh mesh = make_slab(3);
  const DofLayout a = build_layout(mesh, 2, mixed_bc);
  const DofLayout b = build_layout(mesh, 2, mixed_bc);
  CHECK(a.facet_dof_global == b.facet_dof_global);
  CHECK(a.facet_of_qfacet == b.facet_of_qfacet);
  CHECK(a.num_global == b.num_global);
}

TEST_CASE("degree bounds are enforced") {
  const SlabMesh mesh = make_slab(2);
  CHECK_THROWS_AS(build_layout(mesh, 0, mixed_bc), UnsupportedDegree);
  CHECK_THROWS_AS(build_layout(mesh, 5, mixed_bc), UnsupportedDegree);
  CHECK_NOTHROW(build_layout(mesh, 1, mixed_bc));
  CHECK_NOTHROW(build_layout(mesh, 4, mixed_bc));
}

TEST_CASE("Dirichlet values reproduce polynomial boundary data exactly") {
  const SlabMesh mesh = make_slab(4);
  DofLayout layout = build_layout(mesh, 2, mixed_bc);
  const auto u = [](const Eigen::Vector3d& x) {
    return Eigen::Vector2d(x[0] + 2.0 * x[1] + 3.0 * x[2] + 0.5 * x[0] * x[1],
                           4.0 * x[0] - x[1] + x[2] * x[2]);
  };
  set_dirichlet_values(layout, mesh, u);

  const ReferenceTables ref(2);
  double max_err = 0.0;
  int checked = 0;
  for (int q = 0; q < layout.num_qfacets(); ++q) {
    if (!layout.qfacet_dirichlet[q]) {
      // Free facets keep zero stored values.
      for (int j = 0; j < 2 * layout.n2; ++j) CHECK(layout.facet_dof_value(q, j) == 0.0);
      continue;
    }
    const int f = layout.facet_of_qfacet[q];
    const auto corners = mesh.facet_corners(f);
    for (int pt = 0; pt < ref.face.size(); ++pt) {
      const double xi = ref.face.points(pt, 0), eta = ref.face.points(pt, 1);
      const Eigen::Vector3d X = ((1.0 - xi - eta) * corners.row(0) + xi * corners.row(1) +
                                 eta * corners.row(2))
                                    .transpose();
      const Eigen::Vector2d exact = u(X);
      for (int c = 0; c < 2; ++c) {
        double v = 0.0;
        for (int j = 0; j < layout.n2; ++j)
          v += ref.psi(pt, j) * layout.facet_dof_value(q, c * layout.n2 + j);
        max_err = std::max(max_err, std::abs(v - exact[c]));
      }
    }
    ++checked;
  }
  CHECK(checked > 0);
  CHECK(max_err < 1e-12);
}
