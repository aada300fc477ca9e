#include "sthdg/marching.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#ifdef STHDG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <chrono>
#include <cmath>
#include <limits>

#include "sthdg/errors.hpp"

namespace sthdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void accumulate(SolveStats& total, const SolveStats& s) {
  total.assembly_seconds += s.assembly_seconds;
  total.condensation_seconds += s.condensation_seconds;
  total.solve_seconds += s.solve_seconds;
  total.backsub_seconds += s.backsub_seconds;
  total.condensed_residual = std::max(total.condensed_residual, s.condensed_residual);
  total.refinement_steps += s.refinement_steps;
}

/// Inf-norm of the velocity / pressure parts of the difference of two states.
void diff_norms(const SlabState& a, const SlabState& b, const DofLayout& layout,
                double* du, double* dp) {
  const int n3 = layout.n3;
  const int n2 = layout.n2;
  *du = std::max(
      (a.cell.leftCols(2 * n3) - b.cell.leftCols(2 * n3)).cwiseAbs().maxCoeff(),
      (a.facet.leftCols(2 * n2) - b.facet.leftCols(2 * n2)).cwiseAbs().maxCoeff());
  *dp = std::max(
      (a.cell.rightCols(layout.n3p) - b.cell.rightCols(layout.n3p)).cwiseAbs().maxCoeff(),
      (a.facet.rightCols(n2) - b.facet.rightCols(n2)).cwiseAbs().maxCoeff());
}

void state_norms(const SlabState& a, const DofLayout& layout, double* nu_, double* np_) {
  *nu_ = std::max(a.cell.leftCols(2 * layout.n3).cwiseAbs().maxCoeff(),
                  a.facet.leftCols(2 * layout.n2).cwiseAbs().maxCoeff());
  *np_ = std::max(a.cell.rightCols(layout.n3p).cwiseAbs().maxCoeff(),
                  a.facet.rightCols(layout.n2).cwiseAbs().maxCoeff());
}

}  // namespace

std::function<BoundaryKind(int)> bc_lookup(const std::map<int, BoundaryKind>& bc_of_tag) {
  return [bc_of_tag](int tag) {
    const auto it = bc_of_tag.find(tag);
    if (it == bc_of_tag.end())
      throw InconsistentTopology("no boundary condition for tag " + std::to_string(tag));
    return it->second;
  };
}

Eigen::VectorXd triangle_areas(const SpatialMesh& mesh, const Eigen::MatrixXd& positions) {
  Eigen::VectorXd areas(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const Eigen::Vector2d a = positions.row(mesh.triangles(k, 0)).transpose();
    const Eigen::Vector2d b = positions.row(mesh.triangles(k, 1)).transpose();
    const Eigen::Vector2d c = positions.row(mesh.triangles(k, 2)).transpose();
    areas[k] = 0.5 * std::abs(signed_area2(a, b, c));
  }
  return areas;
}

TraceField extract_top_trace(const SlabMesh& mesh, const ReferenceTables& ref,
                             const SlabState& state) {
  const int nt = static_cast<int>(mesh.top_facet_of_triangle.size());
  const int n2 = ref.b2.size();
  const int n3 = ref.b3.size();
  TraceField trace = TraceField::zero(nt, ref.degree);

  for (int k = 0; k < nt; ++k) {
    const int fid = mesh.top_facet_of_triangle[k];
    const Facet& f = mesh.facets[fid];
    const int cell = f.cell0;
    const AffineMap& map = mesh.cell_maps[cell];
    const Eigen::Matrix3d corners = mesh.facet_corners(fid);

    const Eigen::Index nq = ref.face.size();
    Eigen::MatrixXd xi(nq, 3);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Eigen::Vector3d X =
          corners.row(0).transpose() +
          ref.face.points(q, 0) * (corners.row(1) - corners.row(0)).transpose() +
          ref.face.points(q, 1) * (corners.row(2) - corners.row(0)).transpose();
      xi.row(q) = (map.Ainv * (X - map.b)).transpose();
    }
    const Eigen::MatrixXd Phif = ref.b3.values(xi);
    const Eigen::VectorXd ux =
        Phif * state.cell.row(cell).segment(0, n3).transpose();
    const Eigen::VectorXd uy =
        Phif * state.cell.row(cell).segment(n3, n3).transpose();
    // Exact projection onto the orthonormal trace basis.
    trace.coeffs.row(k).segment(0, n2) =
        (ref.psi.transpose() * ref.face.weights.cwiseProduct(ux)).transpose();
    trace.coeffs.row(k).segment(n2, n2) =
        (ref.psi.transpose() * ref.face.weights.cwiseProduct(uy)).transpose();
  }
  return trace;
}

TraceField project_initial(const SpatialMesh& mesh, const std::vector<EdgeInfo>& edges,
                           const Eigen::MatrixXd& positions, int degree,
                           const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u0) {
  const int nt = mesh.num_triangles();
  if (!u0) return TraceField::zero(nt, degree);

  // Finite-difference screen: the input must be divergence-free.
  const double h = 1e-5;
  for (int k = 0; k < nt; ++k) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) c += positions.row(mesh.triangles(k, i)).transpose();
    c /= 3.0;
    const double div = (u0(c + Eigen::Vector2d(h, 0))[0] - u0(c - Eigen::Vector2d(h, 0))[0] +
                        u0(c + Eigen::Vector2d(0, h))[1] - u0(c - Eigen::Vector2d(0, h))[1]) /
                       (2.0 * h);
    const double scale = std::max(1.0, u0(c).norm());
    if (!(std::abs(div) <= 1e-8 * scale))
      throw InvalidInitialCondition("initial velocity has nonzero divergence near (" +
                                    std::to_string(c[0]) + ", " + std::to_string(c[1]) +
                                    "): div = " + std::to_string(div));
  }

  const BasisSet b2(2, degree);
  const BasisSet b1(1, degree);
  const int n2 = b2.size();
  const int nm = b2.subspace_size(degree - 1);  // cell multiplier space
  const int n1 = b1.size();

  std::vector<int> interior_edges;
  for (size_t e = 0; e < edges.size(); ++e)
    if (edges[e].tri1 >= 0) interior_edges.push_back(static_cast<int>(e));
  const int nie = static_cast<int>(interior_edges.size());

  const int off_u = 0;
  const int off_l = nt * 2 * n2;
  const int off_m = off_l + nt * nm;
  const int N = off_m + nie * n1;

  const QuadratureRule tri_rule =
      triangle_rule(std::min(2 * degree + 8, kMaxExactness));
  const QuadratureRule edge_rule =
      interval_rule(std::min(2 * degree + 8, kMaxExactness));
  const Eigen::MatrixXd phi = b2.values(tri_rule.points);
  const Eigen::MatrixXd dphi0 = b2.derivatives(tri_rule.points, 0);
  const Eigen::MatrixXd dphi1 = b2.derivatives(tri_rule.points, 1);
  const Eigen::MatrixXd psi1 = b1.values(edge_rule.points);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);

  std::vector<AffineMap2> maps(nt);
  std::vector<std::array<int, 3>> sorted_ids(nt);
  for (int k = 0; k < nt; ++k) {
    std::array<int, 3> s = {mesh.triangles(k, 0), mesh.triangles(k, 1),
                            mesh.triangles(k, 2)};
    std::sort(s.begin(), s.end());
    sorted_ids[k] = s;
    Eigen::Matrix<double, 3, 2> corners;
    for (int i = 0; i < 3; ++i) corners.row(i) = positions.row(s[i]);
    maps[k] = AffineMap2::from_triangle_any(corners);

    const double measure = std::abs(maps[k].detA);  // = 2 * area
    const int uo = off_u + k * 2 * n2;
    const int lo = off_l + k * nm;

    // Mass block: the basis is orthonormal on the reference triangle.
    for (int i = 0; i < 2 * n2; ++i) trip.emplace_back(uo + i, uo + i, measure);

    const Eigen::MatrixXd Dx = dphi0 * maps[k].Ainv(0, 0) + dphi1 * maps[k].Ainv(1, 0);
    const Eigen::MatrixXd Dy = dphi0 * maps[k].Ainv(0, 1) + dphi1 * maps[k].Ainv(1, 1);
    const Eigen::VectorXd w = tri_rule.weights * measure;

    const Eigen::MatrixXd Bx = phi.leftCols(nm).transpose() * w.asDiagonal() * Dx;
    const Eigen::MatrixXd By = phi.leftCols(nm).transpose() * w.asDiagonal() * Dy;
    for (int m = 0; m < nm; ++m)
      for (int j = 0; j < n2; ++j) {
        trip.emplace_back(lo + m, uo + j, Bx(m, j));
        trip.emplace_back(uo + j, lo + m, Bx(m, j));
        trip.emplace_back(lo + m, uo + n2 + j, By(m, j));
        trip.emplace_back(uo + n2 + j, lo + m, By(m, j));
      }

    for (Eigen::Index q = 0; q < tri_rule.size(); ++q) {
      const Eigen::Vector2d X = maps[k].apply(tri_rule.points.row(q).transpose());
      const Eigen::Vector2d f = u0(X);
      for (int j = 0; j < n2; ++j) {
        rhs[uo + j] += w[q] * phi(q, j) * f[0];
        rhs[uo + n2 + j] += w[q] * phi(q, j) * f[1];
      }
    }
  }

  for (int ie = 0; ie < nie; ++ie) {
    const EdgeInfo& e = edges[interior_edges[ie]];
    const Eigen::Vector2d p0 = positions.row(e.v0).transpose();
    const Eigen::Vector2d p1 = positions.row(e.v1).transpose();
    const Eigen::Vector2d d = p1 - p0;
    const double len = d.norm();
    const Eigen::Vector2d nrm(d[1] / len, -d[0] / len);
    const int mo = off_m + ie * n1;

    const int tris[2] = {e.tri0, e.tri1};
    const double sgn[2] = {1.0, -1.0};
    for (int side = 0; side < 2; ++side) {
      const int k = tris[side];
      const Eigen::Index nq = edge_rule.size();
      Eigen::MatrixXd xi(nq, 2);
      for (Eigen::Index q = 0; q < nq; ++q) {
        const Eigen::Vector2d X = p0 + edge_rule.points(q, 0) * d;
        xi.row(q) = (maps[k].Ainv * (X - maps[k].b)).transpose();
      }
      const Eigen::MatrixXd phie = b2.values(xi);
      const int uo = off_u + k * 2 * n2;
      for (int m = 0; m < n1; ++m)
        for (int j = 0; j < n2; ++j) {
          double v = 0.0;
          for (Eigen::Index q = 0; q < nq; ++q)
            v += edge_rule.weights[q] * len * psi1(q, m) * phie(q, j);
          const double vx = sgn[side] * nrm[0] * v;
          const double vy = sgn[side] * nrm[1] * v;
          trip.emplace_back(mo + m, uo + j, vx);
          trip.emplace_back(uo + j, mo + m, vx);
          trip.emplace_back(mo + m, uo + n2 + j, vy);
          trip.emplace_back(uo + n2 + j, mo + m, vy);
        }
    }
  }

  Eigen::SparseMatrix<double> M(N, N);
  M.setFromTriplets(trip.begin(), trip.end());
#ifdef STHDG_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
#else
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
#endif
  lu.compute(M);
  if (lu.info() != Eigen::Success)
    throw ProjectionSingular("initial-trace projection system is singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite())
    throw ProjectionSingular("initial-trace projection produced non-finite values");

  TraceField trace = TraceField::zero(nt, degree);
  for (int k = 0; k < nt; ++k)
    trace.coeffs.row(k) = x.segment(off_u + k * 2 * n2, 2 * n2).transpose();
  return trace;
}

SlabState solve_slab(const SlabMesh& mesh, const DofLayout& layout,
                     const ReferenceTables& ref, const MarchOptions& opt,
                     const ProblemData& data, const TraceField* bottom,
                     SlabResult* result) {
  FormOptions fopt;
  fopt.nu = opt.nu;
  fopt.alpha = opt.alpha_factor * opt.degree * opt.degree;
  fopt.ale = opt.ale;

  SlabSolver solver(mesh, layout, ref);
  SolveStats st;
  SlabState seed = solver.solve(fopt, nullptr, data, bottom, &st);
  if (result) {
    result->iterations = 1;
    accumulate(result->stats, st);
    result->condensed_residual = st.condensed_residual;
  }

  SlabState prev = seed;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    SlabState cur = solver.solve(fopt, &prev, data, bottom, &st);
    if (result) {
      ++result->iterations;
      accumulate(result->stats, st);
      result->condensed_residual = st.condensed_residual;
    }

    double du = 0, dp = 0, den_u = 0, den_p = 0, norm_u = 0, norm_p = 0;
    diff_norms(cur, prev, layout, &du, &dp);
    diff_norms(cur, seed, layout, &den_u, &den_p);
    state_norms(cur, layout, &norm_u, &norm_p);

    const double inf = std::numeric_limits<double>::infinity();
    const double ru = du == 0.0 ? 0.0 : (den_u == 0.0 ? inf : du / den_u);
    const double rp = dp == 0.0 ? 0.0 : (den_p == 0.0 ? inf : dp / den_p);
    const bool ok_u = ru < opt.tol || du <= opt.tol * std::max(1.0, norm_u);
    const bool ok_p = rp < opt.tol || dp <= opt.tol * std::max(1.0, norm_p);
    if (result) {
      result->rel_delta_u = ru;
      result->rel_delta_p = rp;
    }
    if (ok_u && ok_p) return cur;
    prev = std::move(cur);
  }

  throw NoConvergence("fixed-point iteration did not converge on slab [" +
                          std::to_string(mesh.t0) + ", " + std::to_string(mesh.t1) + "]",
                      opt.max_iterations + 1,
                      result ? result->rel_delta_u : 0.0,
                      result ? result->rel_delta_p : 0.0);
}

MarchSummary march(const Problem& problem, const MarchOptions& opt,
                   const SlabObserver& observer) {
  MarchSummary summary;
  const auto t_mesh0 = Clock::now();

  Eigen::MatrixXd pos0 = move_vertices(problem.mesh, problem.motion, opt.t_begin);
  TraceField trace =
      project_initial(problem.mesh, problem.edges, pos0, opt.degree, problem.initial);
  summary.trace_energy.push_back(trace.energy(triangle_areas(problem.mesh, pos0)));
  summary.mesh_seconds += seconds_since(t_mesh0);

  const ReferenceTables ref(opt.degree);

  for (int n = 0; n < opt.num_slabs; ++n) {
    const double t0 = opt.t_begin + n * opt.dt;
    const double t1 = opt.t_begin + (n + 1) * opt.dt;

    const auto t_setup = Clock::now();
    Eigen::MatrixXd pos1 = move_vertices(problem.mesh, problem.motion, t1);
    SlabMesh mesh = extrude_slab(problem.mesh, problem.edges, pos0, pos1, t0, t1);
    DofLayout layout = build_layout(mesh, opt.degree, bc_lookup(problem.bc_of_tag));
    if (problem.dirichlet) set_dirichlet_values(layout, mesh, problem.dirichlet);
    summary.mesh_seconds += seconds_since(t_setup);

    SlabResult result;
    result.slab = n;
    result.t0 = t0;
    result.t1 = t1;
    SlabState state = solve_slab(mesh, layout, ref, opt, problem.data, &trace, &result);

    trace = extract_top_trace(mesh, ref, state);
    summary.trace_energy.push_back(trace.energy(triangle_areas(problem.mesh, pos1)));
    summary.slabs.push_back(result);
    if (observer) observer(mesh, layout, ref, state, result);

    pos0 = std::move(pos1);
  }

  summary.final_trace = std::move(trace);
  summary.final_positions = std::move(pos0);
  return summary;
}

}  // namespace sthdg
