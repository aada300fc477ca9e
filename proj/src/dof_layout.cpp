#include "sthdg/dof_layout.hpp"

#include <cmath>

#include "sthdg/errors.hpp"
#include "sthdg/quadrature.hpp"

namespace sthdg {

namespace {

/// Physical quadrature points of a facet from its canonical corners.
Eigen::MatrixXd facet_quad_points(const Eigen::Matrix3d& corners,
                                  const Eigen::MatrixXd& ref_pts) {
  Eigen::MatrixXd X(ref_pts.rows(), 3);
  const Eigen::RowVector3d p0 = corners.row(0);
  const Eigen::RowVector3d e1 = corners.row(1) - corners.row(0);
  const Eigen::RowVector3d e2 = corners.row(2) - corners.row(0);
  for (Eigen::Index q = 0; q < ref_pts.rows(); ++q)
    X.row(q) = p0 + ref_pts(q, 0) * e1 + ref_pts(q, 1) * e2;
  return X;
}

}  // namespace

Eigen::MatrixXd pressure_gauge_basis(const SlabMesh& mesh, int degree) {
  const BasisSet b3(3, degree);
  const int n3 = b3.size();
  const int na = degree + 1;  // facet-class polynomials, degree `degree`
  const int ng = degree;      // cell-class polynomials, degree `degree - 1`
  const int nun = 2 * na + 3 * ng;
  const double t0 = mesh.t0, dt = mesh.t1 - mesh.t0;
  const QuadratureRule vol = tet_rule(3 * degree);
  const QuadratureRule face = triangle_rule(3 * degree + 1);

  // Momentum rows of the three cells of the first prism, applied to a
  // candidate mode: -integral of (cell polynomial) * div(v) over the cell
  // plus the facet integrals of (facet polynomial) * v.n against the spatial
  // normal.  A mode is in the gauge exactly when all rows vanish.
  const int tri0 = mesh.cells[0].triangle;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3 * 2 * n3, nun);
  int row0 = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (mesh.cells[c].triangle != tri0) continue;
    const int gcol = 2 * na + (cell_top_corners(mesh, c) - 1) * ng;
    const AffineMap& map = mesh.cell_maps[c];

    const Eigen::MatrixXd d0 = b3.derivatives(vol.points, 0);
    const Eigen::MatrixXd d1 = b3.derivatives(vol.points, 1);
    const Eigen::MatrixXd d2 = b3.derivatives(vol.points, 2);
    const Eigen::MatrixXd Gx =
        d0 * map.Ainv(0, 0) + d1 * map.Ainv(1, 0) + d2 * map.Ainv(2, 0);
    const Eigen::MatrixXd Gy =
        d0 * map.Ainv(0, 1) + d1 * map.Ainv(1, 1) + d2 * map.Ainv(2, 1);
    for (int q = 0; q < vol.size(); ++q) {
      const Eigen::Vector3d X = map.apply(vol.points.row(q).transpose());
      const double w = vol.weights[q] * map.detA;
      const double tau = (X[2] - t0) / dt;
      double tj = 1.0;
      for (int j = 0; j < ng; ++j, tj *= tau)
        for (int i = 0; i < n3; ++i) {
          M(row0 + i, gcol + j) -= w * tj * Gx(q, i);
          M(row0 + n3 + i, gcol + j) -= w * tj * Gy(q, i);
        }
    }
    for (int fid : mesh.cell_facets[c]) {
      const Facet& f = mesh.facets[fid];
      if (!f.carries_trace()) continue;
      const int acol = facet_top_corners(mesh, fid) == 1 ? 0 : na;
      const double sign = mesh.facet_sign(fid, c);
      const double nxs = sign * f.unit_normal[0];
      const double nys = sign * f.unit_normal[1];
      const Eigen::MatrixXd Xf =
          facet_quad_points(mesh.facet_corners(fid), face.points);
      Eigen::MatrixXd xi(Xf.rows(), 3);
      for (Eigen::Index q = 0; q < Xf.rows(); ++q)
        xi.row(q) = (map.Ainv * (Xf.row(q).transpose() - map.b)).transpose();
      const Eigen::MatrixXd Phif = b3.values(xi);
      for (int q = 0; q < face.size(); ++q) {
        const double w = face.weights[q] * 2.0 * f.area;
        const double tau = (Xf(q, 2) - t0) / dt;
        double tj = 1.0;
        for (int j = 0; j < na; ++j, tj *= tau)
          for (int i = 0; i < n3; ++i) {
            M(row0 + i, acol + j) += w * tj * nxs * Phif(q, i);
            M(row0 + n3 + i, acol + j) += w * tj * nys * Phif(q, i);
          }
      }
    }
    row0 += 2 * n3;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  int nullity = 0;
  while (nullity < nun && sv[nun - 1 - nullity] < 1e-10 * sv[0]) ++nullity;
  if (nullity == 0)
    throw InconsistentTopology("pressure gauge basis is unexpectedly empty");
  return svd.matrixV().rightCols(nullity).transpose();
}

DofLayout build_layout(const SlabMesh& mesh, int degree,
                       const std::function<BoundaryKind(int)>& bc_of_tag) {
  if (degree < 1 || degree > 4)
    throw UnsupportedDegree("polynomial degree must be between 1 and 4");
  DofLayout layout;
  layout.degree = degree;
  {
    BasisSet b3(3, degree), b2(2, degree);
    layout.n3 = b3.size();
    layout.n3p = b3.subspace_size(degree - 1);
    layout.n2 = b2.size();
  }

  layout.qfacet_of_facet.assign(mesh.num_facets(), -1);
  bool any_neumann = false;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (!facet.carries_trace()) continue;
    layout.qfacet_of_facet[f] = static_cast<int>(layout.facet_of_qfacet.size());
    layout.facet_of_qfacet.push_back(f);
    bool dirichlet = false;
    if (facet.kind == FacetKind::Boundary) {
      switch (bc_of_tag(facet.boundary_tag)) {
        case BoundaryKind::Dirichlet:
          dirichlet = true;
          break;
        case BoundaryKind::Neumann:
          any_neumann = true;
          break;
      }
    }
    layout.qfacet_dirichlet.push_back(dirichlet ? 1 : 0);
  }

  const int nq = layout.num_qfacets();
  const int n2 = layout.n2;
  layout.facet_dof_global = Eigen::MatrixXi::Constant(nq, 3 * n2, -2);
  layout.facet_dof_value = Eigen::MatrixXd::Zero(nq, 3 * n2);

  // Mark constrained dofs: velocity blocks on Dirichlet facets, plus the
  // pressure gauge pins when no Neumann facet exists.
  for (int q = 0; q < nq; ++q)
    if (layout.qfacet_dirichlet[q])
      for (int i = 0; i < 2 * n2; ++i) layout.facet_dof_global(q, i) = -1;
  if (!any_neumann && nq > 0) {
    // Without a natural boundary the pressure carries a finite-dimensional
    // gauge: modes with zero velocity that annihilate every momentum row.
    // Each such mode assigns one polynomial in slab time to every facet class
    // and every cell class of the prism subdivision (class = number of
    // top-level corners), and all cells of a class are affinely equivalent
    // through time-preserving maps, so the mode space can be computed from a
    // single prism and is valid for the whole slab.  Compute it, store it for
    // error gauge-fitting, and pin one trace pressure coefficient per mode —
    // chosen by column pivoting on two reference facets (one per facet
    // class) so the map from modes to pinned coefficients is invertible.
    layout.pressure_gauge_modes = pressure_gauge_basis(mesh, degree);
    const int nmodes = static_cast<int>(layout.pressure_gauge_modes.rows());
    const int na = degree + 1;

    int qfA = -1, qfB = -1;  // first facet with one / two top corners
    for (int q = 0; q < nq && (qfA < 0 || qfB < 0); ++q) {
      const int cls = facet_top_corners(mesh, layout.facet_of_qfacet[q]);
      if (cls == 1 && qfA < 0) qfA = q;
      if (cls == 2 && qfB < 0) qfB = q;
    }
    if (qfA < 0 || qfB < 0)
      throw InconsistentTopology("slab lacks a facet of each time class");

    // R(r, c): trace coefficient c of gauge mode r, where columns 0..n2-1 are
    // the pressure coefficients of facet qfA and n2..2*n2-1 those of qfB.
    const QuadratureRule rule = triangle_rule(3 * degree + 1);
    const BasisSet b2(2, degree);
    const Eigen::MatrixXd psi = b2.values(rule.points);
    const double dt = mesh.t1 - mesh.t0;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(nmodes, 2 * n2);
    for (int side = 0; side < 2; ++side) {
      const int qf = side == 0 ? qfA : qfB;
      const Eigen::Matrix<double, 3, 3> P =
          mesh.facet_corners(layout.facet_of_qfacet[qf]);
      for (int k = 0; k < rule.size(); ++k) {
        const double t = (1.0 - rule.points(k, 0) - rule.points(k, 1)) * P(0, 2) +
                         rule.points(k, 0) * P(1, 2) + rule.points(k, 1) * P(2, 2);
        const double tau = (t - mesh.t0) / dt;
        for (int r = 0; r < nmodes; ++r) {
          double val = 0.0, tj = 1.0;
          for (int j = 0; j < na; ++j, tj *= tau)
            val += layout.pressure_gauge_modes(r, side * na + j) * tj;
          R.row(r).segment(side * n2, n2) += rule.weights[k] * val * psi.row(k);
        }
      }
    }
    for (int j = 0; j < nmodes; ++j) {
      int pivot = -1;
      double best = 0.0;
      for (int i = 0; i < 2 * n2; ++i) {
        const int qf = i < n2 ? qfA : qfB;
        if (layout.facet_dof_global(qf, 2 * n2 + (i % n2)) == -1) continue;
        if (std::abs(R(j, i)) > best) {
          best = std::abs(R(j, i));
          pivot = i;
        }
      }
      if (pivot < 0 || best == 0.0)
        throw InconsistentTopology("cannot pin the pressure gauge");
      layout.facet_dof_global(pivot < n2 ? qfA : qfB, 2 * n2 + (pivot % n2)) = -1;
      for (int r = j + 1; r < nmodes; ++r)
        R.row(r) -= (R(r, pivot) / R(j, pivot)) * R.row(j);
    }
    layout.pressure_pinned = true;
  }

  int next = 0;
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < 2 * n2; ++i)
      if (layout.facet_dof_global(q, i) == -2) layout.facet_dof_global(q, i) = next++;
  layout.num_velocity_global = next;
  for (int q = 0; q < nq; ++q)
    for (int i = 2 * n2; i < 3 * n2; ++i)
      if (layout.facet_dof_global(q, i) == -2) layout.facet_dof_global(q, i) = next++;
  layout.num_global = next;
  return layout;
}

void set_dirichlet_values(
    DofLayout& layout, const SlabMesh& mesh,
    const std::function<Eigen::Vector2d(const Eigen::Vector3d&)>& u_dirichlet) {
  const int n2 = layout.n2;
  const QuadratureRule rule = triangle_rule(3 * layout.degree + 1);
  const BasisSet b2(2, layout.degree);
  const Eigen::MatrixXd psi = b2.values(rule.points);  // Nq x n2

  for (int q = 0; q < layout.num_qfacets(); ++q) {
    if (!layout.qfacet_dirichlet[q]) continue;
    const int f = layout.facet_of_qfacet[q];
    const Eigen::Matrix<double, 3, 3> P = mesh.facet_corners(f);
    // The trace basis is orthonormal on the reference triangle, so the
    // projection coefficients are plain weighted sums of point values.
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(n2, 2);
    for (int k = 0; k < rule.size(); ++k) {
      const Eigen::Vector3d X = P.row(0).transpose() +
                                rule.points(k, 0) * (P.row(1) - P.row(0)).transpose() +
                                rule.points(k, 1) * (P.row(2) - P.row(0)).transpose();
      const Eigen::Vector2d u = u_dirichlet(X);
      coeffs += rule.weights[k] * psi.row(k).transpose() * u.transpose();
    }
    for (int i = 0; i < n2; ++i) {
      layout.facet_dof_value(q, i) = coeffs(i, 0);
      layout.facet_dof_value(q, n2 + i) = coeffs(i, 1);
    }
  }
}

}  // namespace sthdg
