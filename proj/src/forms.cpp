#include "sthdg/forms.hpp"

#include <cmath>

namespace sthdg {

SlabState SlabState::zero(int num_cells, int num_qfacets, const DofLayout& layout) {
  SlabState s;
  s.cell = Eigen::MatrixXd::Zero(num_cells, layout.cell_block());
  s.facet = Eigen::MatrixXd::Zero(num_qfacets, layout.facet_block());
  return s;
}

TraceField TraceField::zero(int num_triangles, int degree) {
  TraceField t;
  t.degree = degree;
  const BasisSet b2(2, degree);
  t.coeffs = Eigen::MatrixXd::Zero(num_triangles, 2 * b2.size());
  return t;
}

double TraceField::energy(const Eigen::VectorXd& areas) const {
  double e = 0.0;
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i)
    e += 2.0 * areas[i] * coeffs.row(i).squaredNorm();
  return e;
}

ReferenceTables::ReferenceTables(int deg)
    : degree(deg),
      b3(3, deg),
      b2(2, deg),
      vol(tet_rule(3 * deg + 1)),
      face(triangle_rule(3 * deg + 1)) {
  phi = b3.values(vol.points);
  for (int d = 0; d < 3; ++d) dphi[d] = b3.derivatives(vol.points, d);
  psi = b2.values(face.points);
}

namespace {

/// Physical quadrature points of a facet from its canonical corners.
Eigen::MatrixXd facet_points(const Eigen::Matrix3d& corners,
                             const Eigen::MatrixXd& ref_pts) {
  const Eigen::Index nq = ref_pts.rows();
  Eigen::MatrixXd X(nq, 3);
  const Eigen::RowVector3d p0 = corners.row(0);
  const Eigen::RowVector3d e1 = corners.row(1) - corners.row(0);
  const Eigen::RowVector3d e2 = corners.row(2) - corners.row(0);
  for (Eigen::Index q = 0; q < nq; ++q)
    X.row(q) = p0 + ref_pts(q, 0) * e1 + ref_pts(q, 1) * e2;
  return X;
}

/// Pull physical points back to the cell's reference coordinates.
Eigen::MatrixXd pull_back(const AffineMap& map, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd xi(X.rows(), 3);
  for (Eigen::Index q = 0; q < X.rows(); ++q)
    xi.row(q) = (map.Ainv * (X.row(q).transpose() - map.b)).transpose();
  return xi;
}

}  // namespace

void assemble_cell(const SlabMesh& mesh, const DofLayout& layout,
                   const ReferenceTables& ref, const FormOptions& opt,
                   const SlabState* advect, const ProblemData& data,
                   const TraceField* bottom, int cell, CellSystem& out) {
  const int n3 = layout.n3;
  const int n3p = layout.n3p;
  const int n2 = layout.n2;
  const int cb = layout.cell_block();
  const int fb = layout.facet_block();

  // Trace facets of this cell, in cell_facets order.
  out.qfacets.clear();
  for (int fid : mesh.cell_facets[cell]) {
    const Facet& f = mesh.facets[fid];
    if (f.carries_trace()) out.qfacets.push_back(layout.qfacet_of_facet[fid]);
  }
  const int nqf = static_cast<int>(out.qfacets.size());

  out.A = Eigen::MatrixXd::Zero(cb, cb);
  out.B = Eigen::MatrixXd::Zero(cb, nqf * fb);
  out.C = Eigen::MatrixXd::Zero(nqf * fb, cb);
  out.D = Eigen::MatrixXd::Zero(nqf * fb, nqf * fb);
  out.rW = Eigen::VectorXd::Zero(cb);
  out.rF = Eigen::VectorXd::Zero(nqf * fb);

  const AffineMap& map = mesh.cell_maps[cell];
  const double hK = mesh.cell_h[cell];
  const Eigen::Index nq3 = ref.vol.size();
  const Eigen::Index nq2 = ref.face.size();

  // ---- volume tables -------------------------------------------------------
  const Eigen::MatrixXd& Phi = ref.phi;
  Eigen::MatrixXd Gx = ref.dphi[0] * map.Ainv(0, 0) + ref.dphi[1] * map.Ainv(1, 0) +
                       ref.dphi[2] * map.Ainv(2, 0);
  Eigen::MatrixXd Gy = ref.dphi[0] * map.Ainv(0, 1) + ref.dphi[1] * map.Ainv(1, 1) +
                       ref.dphi[2] * map.Ainv(2, 1);
  Eigen::MatrixXd Gt = ref.dphi[0] * map.Ainv(0, 2) + ref.dphi[1] * map.Ainv(1, 2) +
                       ref.dphi[2] * map.Ainv(2, 2);
  const Eigen::VectorXd wq = ref.vol.weights * map.detA;
  const auto W = wq.asDiagonal();

  const auto bx = [&](int c) { return c * n3; };  // cell component offset
  const int bp = 2 * n3;                          // cell pressure offset

  // Advecting cell field at the volume points (zero when advect == nullptr).
  Eigen::VectorXd w1, w2;
  if (advect) {
    w1 = Phi * advect->cell.row(cell).segment(0, n3).transpose();
    w2 = Phi * advect->cell.row(cell).segment(n3, n3).transpose();
  }

  if (opt.viscous) {
    const Eigen::MatrixXd K = opt.nu * (Gx.transpose() * W * Gx + Gy.transpose() * W * Gy);
    out.A.block(bx(0), bx(0), n3, n3) += K;
    out.A.block(bx(1), bx(1), n3, n3) += K;
  }

  if (opt.pressure) {
    const auto Phip = Phi.leftCols(n3p);
    const Eigen::MatrixXd Bx = Gx.transpose() * W * Phip;   // n3 x n3p
    const Eigen::MatrixXd By = Gy.transpose() * W * Phip;
    out.A.block(bx(0), bp, n3, n3p) -= Bx;
    out.A.block(bx(1), bp, n3, n3p) -= By;
    out.A.block(bp, bx(0), n3p, n3) += Bx.transpose();
    out.A.block(bp, bx(1), n3p, n3) += By.transpose();
  }

  if (opt.transport) {
    Eigen::MatrixXd Gadv = Gt;
    if (advect) {
      Gadv += w1.asDiagonal() * Gx;
      Gadv += w2.asDiagonal() * Gy;
    }
    const Eigen::MatrixXd T = Gadv.transpose() * W * Phi;
    out.A.block(bx(0), bx(0), n3, n3) -= T;
    out.A.block(bx(1), bx(1), n3, n3) -= T;
  }

  if (data.forcing) {
    Eigen::VectorXd f1(nq3), f2(nq3);
    for (Eigen::Index q = 0; q < nq3; ++q) {
      const Eigen::Vector3d X = map.apply(ref.vol.points.row(q).transpose());
      const Eigen::Vector2d f = data.forcing(X);
      f1[q] = f[0];
      f2[q] = f[1];
    }
    out.rW.segment(bx(0), n3) += Phi.transpose() * (wq.cwiseProduct(f1));
    out.rW.segment(bx(1), n3) += Phi.transpose() * (wq.cwiseProduct(f2));
  }

  // ---- facets --------------------------------------------------------------
  int slot = 0;
  for (int fid : mesh.cell_facets[cell]) {
    const Facet& f = mesh.facets[fid];
    const double sign = mesh.facet_sign(fid, cell);
    const Eigen::Matrix3d corners = mesh.facet_corners(fid);
    const Eigen::VectorXd wf = ref.face.weights * (2.0 * f.area);
    const auto Wf = wf.asDiagonal();

    const Eigen::MatrixXd Xf = facet_points(corners, ref.face.points);
    const Eigen::MatrixXd xi = pull_back(map, Xf);
    const Eigen::MatrixXd Phif = ref.b3.values(xi);

    if (f.kind == FacetKind::Bottom) {
      if (opt.transport && bottom) {
        Eigen::MatrixXd um(nq2, 2);
        um.col(0) = ref.psi * bottom->coeffs.row(f.spatial_triangle)
                                  .segment(0, n2).transpose();
        um.col(1) = ref.psi * bottom->coeffs.row(f.spatial_triangle)
                                  .segment(n2, n2).transpose();
        out.rW.segment(bx(0), n3) += Phif.transpose() * (wf.cwiseProduct(um.col(0)));
        out.rW.segment(bx(1), n3) += Phif.transpose() * (wf.cwiseProduct(um.col(1)));
      }
      continue;
    }
    if (f.kind == FacetKind::Top) {
      if (opt.transport) {
        const Eigen::MatrixXd M = Phif.transpose() * Wf * Phif;
        out.A.block(bx(0), bx(0), n3, n3) += M;
        out.A.block(bx(1), bx(1), n3, n3) += M;
      }
      continue;
    }

    // Trace (interior or boundary) facet.
    const int q = out.qfacets[slot];
    const int fo = slot * fb;
    ++slot;

    const double nx = sign * f.unit_normal[0];
    const double ny = sign * f.unit_normal[1];
    const double nt = sign * f.unit_normal[2];
    const bool neumann = f.kind == FacetKind::Boundary && !layout.qfacet_dirichlet[q];

    const Eigen::MatrixXd& Psi = ref.psi;

    if (opt.viscous) {
      // Penalty.
      const double pen = opt.nu * opt.alpha / hK;
      const Eigen::MatrixXd Mpp = Phif.transpose() * Wf * Phif;
      const Eigen::MatrixXd Mpf = Phif.transpose() * Wf * Psi;
      const Eigen::MatrixXd Mff = Psi.transpose() * Wf * Psi;
      for (int c = 0; c < 2; ++c) {
        out.A.block(bx(c), bx(c), n3, n3) += pen * Mpp;
        out.B.block(bx(c), fo + c * n2, n3, n2) -= pen * Mpf;
        out.C.block(fo + c * n2, bx(c), n2, n3) -= pen * Mpf.transpose();
        out.D.block(fo + c * n2, fo + c * n2, n2, n2) += pen * Mff;
      }
      // Consistency: normal derivative of the cell basis on the facet.
      Eigen::MatrixXd Gxf = Eigen::MatrixXd::Zero(nq2, n3);
      Eigen::MatrixXd Gyf = Eigen::MatrixXd::Zero(nq2, n3);
      for (int d = 0; d < 3; ++d) {
        const Eigen::MatrixXd Dref = ref.b3.derivatives(xi, d);
        Gxf += Dref * map.Ainv(d, 0);
        Gyf += Dref * map.Ainv(d, 1);
      }
      const Eigen::MatrixXd Dn = Gxf * nx + Gyf * ny;  // nq2 x n3
      const Eigen::MatrixXd Cn = Phif.transpose() * Wf * Dn;
      const Eigen::MatrixXd DnPsi = Dn.transpose() * Wf * Psi;
      for (int c = 0; c < 2; ++c) {
        out.A.block(bx(c), bx(c), n3, n3) -= opt.nu * (Cn + Cn.transpose());
        out.B.block(bx(c), fo + c * n2, n3, n2) += opt.nu * DnPsi;
        out.C.block(fo + c * n2, bx(c), n2, n3) += opt.nu * DnPsi.transpose();
      }
    }

    if (opt.pressure) {
      const Eigen::MatrixXd Mpf = Phif.transpose() * Wf * Psi;  // n3 x n2
      const Eigen::MatrixXd Mff = Psi.transpose() * Wf * Psi;
      const double nc[2] = {nx, ny};
      for (int c = 0; c < 2; ++c) {
        // Momentum equation: facet pressure tested against v.n.
        out.B.block(bx(c), fo + 2 * n2, n3, n2) += nc[c] * Mpf;
        out.D.block(fo + c * n2, fo + 2 * n2, n2, n2) -= nc[c] * Mff;
        // Mass equation: normal-flux continuity tested against the facet
        // pressure.
        out.C.block(fo + 2 * n2, bx(c), n2, n3) -= nc[c] * Mpf.transpose();
        out.D.block(fo + 2 * n2, fo + c * n2, n2, n2) += nc[c] * Mff;
      }
    }

    if (opt.transport) {
      // Upwind normal speed from the cell-side advecting field.
      Eigen::VectorXd s = Eigen::VectorXd::Zero(nq2);
      Eigen::VectorXd wn = Eigen::VectorXd::Zero(nq2);
      if (advect) {
        const Eigen::VectorXd wv1 =
            Phif * advect->cell.row(cell).segment(0, n3).transpose();
        const Eigen::VectorXd wv2 =
            Phif * advect->cell.row(cell).segment(n3, n3).transpose();
        wn = wv1 * nx + wv2 * ny;
      }
      if (opt.ale) {
        const double vgn = -nt;  // grid normal velocity times the spatial normal
        for (Eigen::Index j = 0; j < nq2; ++j) s[j] = wn[j] - vgn;
      } else {
        for (Eigen::Index j = 0; j < nq2; ++j) s[j] = nt + wn[j];
      }
      const Eigen::VectorXd sp = s.cwiseMax(0.0);
      const Eigen::VectorXd sm = s.cwiseMin(0.0);
      const Eigen::MatrixXd Hpp = Phif.transpose() * (wf.cwiseProduct(sp)).asDiagonal() * Phif;
      const Eigen::MatrixXd Hpf = Phif.transpose() * (wf.cwiseProduct(sm)).asDiagonal() * Psi;
      const Eigen::MatrixXd Hfp = Psi.transpose() * (wf.cwiseProduct(sp)).asDiagonal() * Phif;
      const Eigen::MatrixXd Hff = Psi.transpose() * (wf.cwiseProduct(sm)).asDiagonal() * Psi;
      for (int c = 0; c < 2; ++c) {
        out.A.block(bx(c), bx(c), n3, n3) += Hpp;
        out.B.block(bx(c), fo + c * n2, n3, n2) += Hpf;
        out.C.block(fo + c * n2, bx(c), n2, n3) -= Hfp;
        out.D.block(fo + c * n2, fo + c * n2, n2, n2) -= Hff;
      }

      if (neumann) {
        // Outflow stabilization with the facet advecting field.
        Eigen::VectorXd sbar = Eigen::VectorXd::Zero(nq2);
        Eigen::VectorXd wnb = Eigen::VectorXd::Zero(nq2);
        if (advect) {
          const Eigen::VectorXd wb1 =
              Psi * advect->facet.row(q).segment(0, n2).transpose();
          const Eigen::VectorXd wb2 =
              Psi * advect->facet.row(q).segment(n2, n2).transpose();
          wnb = wb1 * nx + wb2 * ny;
        }
        if (opt.ale) {
          const double vgn = -nt;
          for (Eigen::Index j = 0; j < nq2; ++j) sbar[j] = wnb[j] - vgn;
        } else {
          for (Eigen::Index j = 0; j < nq2; ++j) sbar[j] = nt + wnb[j];
        }
        const Eigen::VectorXd sbp = sbar.cwiseMax(0.0);
        const Eigen::MatrixXd Sff =
            Psi.transpose() * (wf.cwiseProduct(sbp)).asDiagonal() * Psi;
        for (int c = 0; c < 2; ++c)
          out.D.block(fo + c * n2, fo + c * n2, n2, n2) += Sff;
      }
    }

    if (neumann && data.neumann) {
      Eigen::VectorXd g1(nq2), g2(nq2);
      for (Eigen::Index j = 0; j < nq2; ++j) {
        const Eigen::Vector2d g = data.neumann(Xf.row(j).transpose());
        g1[j] = g[0];
        g2[j] = g[1];
      }
      out.rF.segment(fo, n2) -= Psi.transpose() * (wf.cwiseProduct(g1));
      out.rF.segment(fo + n2, n2) -= Psi.transpose() * (wf.cwiseProduct(g2));
    }
  }
}

double quadratic_form(const SlabMesh& mesh, const DofLayout& layout,
                      const ReferenceTables& ref, const FormOptions& opt,
                      const SlabState* advect, const SlabState& state) {
  const int fb = layout.facet_block();
  ProblemData no_data;
  CellSystem sys;
  double total = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    assemble_cell(mesh, layout, ref, opt, advect, no_data, nullptr, c, sys);
    const Eigen::VectorXd W = state.cell.row(c).transpose();
    Eigen::VectorXd F(static_cast<Eigen::Index>(sys.qfacets.size()) * fb);
    for (size_t s = 0; s < sys.qfacets.size(); ++s)
      F.segment(static_cast<Eigen::Index>(s) * fb, fb) =
          state.facet.row(sys.qfacets[s]).transpose();
    total += W.dot(sys.A * W) + W.dot(sys.B * F) + F.dot(sys.C * W) + F.dot(sys.D * F);
  }
  return total;
}

}  // namespace sthdg
