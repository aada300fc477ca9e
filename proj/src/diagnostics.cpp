#include "sthdg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "sthdg/errors.hpp"
#include "sthdg/vtk_io.hpp"

namespace sthdg {

namespace {

/// Quadrature and basis tables for error measurement, at higher exactness
/// than assembly so the measured errors are quadrature-insensitive.
struct ErrorTables {
  explicit ErrorTables(int degree)
      : vol(tet_rule(std::min(2 * degree + 6, kMaxExactness))),
        face(triangle_rule(std::min(2 * degree + 6, kMaxExactness))),
        b3(3, degree),
        b2(2, degree) {
    phi = b3.values(vol.points);
    for (int d = 0; d < 3; ++d) dphi[d] = b3.derivatives(vol.points, d);
    psi = b2.values(face.points);
  }

  QuadratureRule vol;
  QuadratureRule face;
  BasisSet b3;
  BasisSet b2;
  Eigen::MatrixXd phi;
  std::array<Eigen::MatrixXd, 3> dphi;
  Eigen::MatrixXd psi;
};

struct Accumulators {
  // Space-time accumulators over all slabs.
  double eu2 = 0.0;          // velocity error squared
  double ep2 = 0.0;          // pressure error squared (gauge-adjusted per slab
                             // for runs without a natural boundary)
  double volume = 0.0;
  double div2 = 0.0;
  double div_max = 0.0;
  double jump2 = 0.0;
  double vel_scale = 0.0;
  // Final-time accumulators, overwritten each slab so the last slab wins.
  double top_eu2 = 0.0;
  double top_ep2 = 0.0;
  double top_ep1 = 0.0;
  double top_area = 0.0;
};

Eigen::MatrixXd facet_quad_points(const Eigen::Matrix3d& corners,
                                  const Eigen::MatrixXd& ref_pts) {
  Eigen::MatrixXd X(ref_pts.rows(), 3);
  for (Eigen::Index q = 0; q < ref_pts.rows(); ++q)
    X.row(q) = corners.row(0) + ref_pts(q, 0) * (corners.row(1) - corners.row(0)) +
               ref_pts(q, 1) * (corners.row(2) - corners.row(0));
  return X;
}

Eigen::MatrixXd cell_values_at(const SlabMesh& mesh, const ErrorTables& tab, int cell,
                               const Eigen::MatrixXd& X) {
  const AffineMap& map = mesh.cell_maps[cell];
  Eigen::MatrixXd xi(X.rows(), 3);
  for (Eigen::Index q = 0; q < X.rows(); ++q)
    xi.row(q) = (map.Ainv * (X.row(q).transpose() - map.b)).transpose();
  return tab.b3.values(xi);
}

void observe_slab(const CaseSetup& setup, const ErrorTables& tab, const SlabMesh& mesh,
                  const DofLayout& layout, const SlabState& state, Accumulators& acc) {
  const int n3 = layout.n3;
  const int n3p = layout.n3p;
  const int n2 = layout.n2;

  // Without a natural boundary the computed pressure is gauge-fixed per slab,
  // offset from the exact one by some element of the slab's gauge mode space
  // (see DofLayout::pressure_gauge_modes).  Accumulate the moment system of
  // the error against the cell restrictions of that basis and subtract the
  // best fit before adding this slab's contribution.
  const bool adjust = setup.has_exact && layout.pressure_pinned &&
                      layout.pressure_gauge_modes.rows() > 0;
  const int nmodes = adjust ? static_cast<int>(layout.pressure_gauge_modes.rows()) : 0;
  const int na = layout.degree + 1, ngc = layout.degree;
  const double slab_t0 = mesh.t0;
  const double slab_dt = std::max(mesh.t1 - mesh.t0, 1e-300);
  double slab_ep2 = 0.0;
  Eigen::VectorXd bp = Eigen::VectorXd::Zero(nmodes);
  Eigen::MatrixXd Mp = Eigen::MatrixXd::Zero(nmodes, nmodes);
  Eigen::VectorXd gval(std::max(nmodes, 1));

  // --- cell quantities -------------------------------------------------------
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const AffineMap& map = mesh.cell_maps[c];
    const int gcol = adjust ? 2 * na + (cell_top_corners(mesh, c) - 1) * ngc : 0;
    const Eigen::VectorXd cux = state.cell.row(c).segment(0, n3).transpose();
    const Eigen::VectorXd cuy = state.cell.row(c).segment(n3, n3).transpose();
    const Eigen::VectorXd cp = state.cell.row(c).segment(2 * n3, n3p).transpose();

    const Eigen::VectorXd ux = tab.phi * cux;
    const Eigen::VectorXd uy = tab.phi * cuy;
    const Eigen::VectorXd pv = tab.phi.leftCols(n3p) * cp;

    Eigen::MatrixXd Gx = tab.dphi[0] * map.Ainv(0, 0) + tab.dphi[1] * map.Ainv(1, 0) +
                         tab.dphi[2] * map.Ainv(2, 0);
    Eigen::MatrixXd Gy = tab.dphi[0] * map.Ainv(0, 1) + tab.dphi[1] * map.Ainv(1, 1) +
                         tab.dphi[2] * map.Ainv(2, 1);
    const Eigen::VectorXd divv = Gx * cux + Gy * cuy;

    for (Eigen::Index q = 0; q < tab.vol.size(); ++q) {
      const double w = tab.vol.weights[q] * map.detA;
      acc.div_max = std::max(acc.div_max, std::abs(divv[q]));
      acc.div2 += w * divv[q] * divv[q];
      acc.vel_scale = std::max({acc.vel_scale, std::abs(ux[q]), std::abs(uy[q])});
      acc.volume += w;
      if (setup.has_exact) {
        const Eigen::Vector3d X = map.apply(tab.vol.points.row(q).transpose());
        const Eigen::Vector2d ue = setup.exact_velocity(X);
        const double dp = setup.exact_pressure(X) - pv[q];
        acc.eu2 += w * ((ux[q] - ue[0]) * (ux[q] - ue[0]) +
                        (uy[q] - ue[1]) * (uy[q] - ue[1]));
        slab_ep2 += w * dp * dp;
        if (adjust) {
          const double tau = (X[2] - slab_t0) / slab_dt;
          for (int r = 0; r < nmodes; ++r) {
            double v = 0.0, tj = 1.0;
            for (int j = 0; j < ngc; ++j, tj *= tau)
              v += layout.pressure_gauge_modes(r, gcol + j) * tj;
            gval[r] = v;
          }
          bp += (w * dp) * gval.head(nmodes);
          Mp += w * gval.head(nmodes) * gval.head(nmodes).transpose();
        }
      }
    }
  }
  if (adjust && Mp.rows() > 0) {
    // The cell restriction of the gauge basis can be rank-deficient, so use a
    // rank-revealing least-squares solve for the best-fit subtraction.
    const double fit = bp.dot(Mp.completeOrthogonalDecomposition().solve(bp));
    acc.ep2 += std::max(0.0, slab_ep2 - fit);
  } else {
    acc.ep2 += slab_ep2;
  }

  // --- facet jumps -----------------------------------------------------------
  for (size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const Facet& f = mesh.facets[fi];
    if (f.kind != FacetKind::Interior && f.kind != FacetKind::Boundary) continue;
    const Eigen::Matrix3d corners = mesh.facet_corners(static_cast<int>(fi));
    const Eigen::MatrixXd X = facet_quad_points(corners, tab.face.points);

    const Eigen::MatrixXd Phi0 = cell_values_at(mesh, tab, f.cell0, X);
    const double nx0 = f.sign0 * f.unit_normal[0];
    const double ny0 = f.sign0 * f.unit_normal[1];
    Eigen::VectorXd un0 =
        (Phi0 * state.cell.row(f.cell0).segment(0, n3).transpose()) * nx0 +
        (Phi0 * state.cell.row(f.cell0).segment(n3, n3).transpose()) * ny0;

    Eigen::VectorXd jump;
    if (f.kind == FacetKind::Interior) {
      const Eigen::MatrixXd Phi1 = cell_values_at(mesh, tab, f.cell1, X);
      const double nx1 = f.sign1 * f.unit_normal[0];
      const double ny1 = f.sign1 * f.unit_normal[1];
      const Eigen::VectorXd un1 =
          (Phi1 * state.cell.row(f.cell1).segment(0, n3).transpose()) * nx1 +
          (Phi1 * state.cell.row(f.cell1).segment(n3, n3).transpose()) * ny1;
      jump = un0 + un1;
    } else {
      const int q = layout.qfacet_of_facet[fi];
      const Eigen::VectorXd ubn =
          (tab.psi * state.facet.row(q).segment(0, n2).transpose()) * nx0 +
          (tab.psi * state.facet.row(q).segment(n2, n2).transpose()) * ny0;
      jump = un0 - ubn;
    }
    for (Eigen::Index qq = 0; qq < tab.face.size(); ++qq)
      acc.jump2 += tab.face.weights[qq] * 2.0 * f.area * jump[qq] * jump[qq];
  }

  // --- final-time errors (kept from the last slab) ---------------------------
  if (setup.has_exact) {
    acc.top_eu2 = acc.top_ep2 = acc.top_ep1 = acc.top_area = 0.0;
    for (int fid : mesh.top_facet_of_triangle) {
      const Facet& f = mesh.facets[fid];
      const Eigen::Matrix3d corners = mesh.facet_corners(fid);
      const Eigen::MatrixXd X = facet_quad_points(corners, tab.face.points);
      const Eigen::MatrixXd Phi = cell_values_at(mesh, tab, f.cell0, X);
      const Eigen::VectorXd ux =
          Phi * state.cell.row(f.cell0).segment(0, n3).transpose();
      const Eigen::VectorXd uy =
          Phi * state.cell.row(f.cell0).segment(n3, n3).transpose();
      const Eigen::VectorXd pv =
          Phi.leftCols(n3p) * state.cell.row(f.cell0).segment(2 * n3, n3p).transpose();
      for (Eigen::Index q = 0; q < tab.face.size(); ++q) {
        const double w = tab.face.weights[q] * 2.0 * f.area;
        const Eigen::Vector2d ue = setup.exact_velocity(X.row(q).transpose());
        const double dp = setup.exact_pressure(X.row(q).transpose()) - pv[q];
        acc.top_eu2 += w * ((ux[q] - ue[0]) * (ux[q] - ue[0]) +
                            (uy[q] - ue[1]) * (uy[q] - ue[1]));
        acc.top_ep2 += w * dp * dp;
        acc.top_ep1 += w * dp;
        acc.top_area += w;
      }
    }
  }
}

}  // namespace

DiagnosticsReport run_case(const CaseSetup& setup, const MarchOptions& opt,
                           const std::string& vtk_dir, const std::string& matrix_path) {
  DiagnosticsReport report;
  report.config.case_name = setup.name;
  report.config.degree = opt.degree;
  report.config.num_slabs = opt.num_slabs;
  report.config.dt = opt.dt;
  report.config.nu = opt.nu;
  report.config.tol = opt.tol;
  report.config.alpha_factor = opt.alpha_factor;
  report.config.ale = opt.ale;
  report.has_exact = setup.has_exact;

  const ErrorTables tab(opt.degree);
  Accumulators acc;

  auto observer = [&](const SlabMesh& mesh, const DofLayout& layout,
                      const ReferenceTables& ref, const SlabState& state,
                      const SlabResult& result) {
    observe_slab(setup, tab, mesh, layout, state, acc);
    report.max_condensed_residual =
        std::max(report.max_condensed_residual, result.condensed_residual);
    if (!vtk_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "/slab_%04d.vtk", result.slab);
      write_slab_vtk(mesh, layout, ref, state, vtk_dir + name);
    }
  };

  if (!matrix_path.empty()) {
    // Export the condensed matrix of the first slab's seed solve.
    const Eigen::MatrixXd pos0 =
        move_vertices(setup.problem.mesh, setup.problem.motion, opt.t_begin);
    const Eigen::MatrixXd pos1 = move_vertices(setup.problem.mesh, setup.problem.motion,
                                               opt.t_begin + opt.dt);
    SlabMesh mesh = extrude_slab(setup.problem.mesh, setup.problem.edges, pos0, pos1,
                                 opt.t_begin, opt.t_begin + opt.dt);
    DofLayout layout = build_layout(mesh, opt.degree, bc_lookup(setup.problem.bc_of_tag));
    if (setup.problem.dirichlet) set_dirichlet_values(layout, mesh, setup.problem.dirichlet);
    const ReferenceTables ref(opt.degree);
    const TraceField trace = project_initial(setup.problem.mesh, setup.problem.edges, pos0,
                                             opt.degree, setup.problem.initial);
    FormOptions fopt;
    fopt.nu = opt.nu;
    fopt.alpha = opt.alpha_factor * opt.degree * opt.degree;
    fopt.ale = opt.ale;
    SlabSolver solver(mesh, layout, ref);
    solver.solve(fopt, nullptr, setup.problem.data, &trace, nullptr);
    write_matrix_market(solver.condensed_matrix(), matrix_path);
  }

  const MarchSummary summary = march(setup.problem, opt, observer);

  report.slab_energies = summary.trace_energy;
  report.mesh_seconds = summary.mesh_seconds;
  for (const SlabResult& r : summary.slabs) {
    report.iterations.push_back(r.iterations);
    report.assembly_seconds += r.stats.assembly_seconds;
    report.condensation_seconds += r.stats.condensation_seconds;
    report.solve_seconds += r.stats.solve_seconds;
    report.backsub_seconds += r.stats.backsub_seconds;
  }

  report.div_max = acc.div_max;
  report.div_l2 = std::sqrt(acc.div2);
  report.normal_jump = std::sqrt(acc.jump2);
  report.velocity_scale = acc.vel_scale;
  if (setup.has_exact) {
    report.err_u_spacetime = std::sqrt(acc.eu2);
    report.err_u_final = std::sqrt(acc.top_eu2);
    report.err_p_spacetime = std::sqrt(acc.ep2);
    if (setup.pressure_gauge_free) {
      // On the final-time plane the per-slab gauge offset is one constant.
      const double mean_top = acc.top_area > 0 ? acc.top_ep1 / acc.top_area : 0.0;
      report.err_p_final =
          std::sqrt(std::max(0.0, acc.top_ep2 - acc.top_area * mean_top * mean_top));
    } else {
      report.err_p_final = std::sqrt(acc.top_ep2);
    }
  }
  return report;
}

void write_report_json(const DiagnosticsReport& report, const std::string& path) {
  nlohmann::json j;
  j["config"] = {{"case", report.config.case_name},
                 {"degree", report.config.degree},
                 {"nx", report.config.nx},
                 {"slabs", report.config.num_slabs},
                 {"dt", report.config.dt},
                 {"nu", report.config.nu},
                 {"tol", report.config.tol},
                 {"alpha_factor", report.config.alpha_factor},
                 {"ale", report.config.ale},
                 {"mesh_file", report.config.mesh_file}};
  if (report.has_exact) {
    j["errors"] = {{"u_final", report.err_u_final},
                   {"p_final", report.err_p_final},
                   {"u_spacetime", report.err_u_spacetime},
                   {"p_spacetime", report.err_p_spacetime}};
  } else {
    j["errors"] = nullptr;
  }
  j["certificates"] = {{"div_max", report.div_max},
                       {"div_l2", report.div_l2},
                       {"normal_jump", report.normal_jump},
                       {"velocity_scale", report.velocity_scale},
                       {"max_condensed_residual", report.max_condensed_residual},
                       {"slab_energies", report.slab_energies}};
  j["iterations"] = report.iterations;
  j["timings"] = {{"mesh", report.mesh_seconds},
                  {"assembly", report.assembly_seconds},
                  {"condensation", report.condensation_seconds},
                  {"solve", report.solve_seconds},
                  {"back_substitution", report.backsub_seconds}};

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failure on " + path);
}

void write_rates_csv(const std::vector<RateRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "level,nx,slabs,cells_per_slab,err_u_final,rate_u_final,err_p_final,"
         "rate_p_final,err_u_spacetime,rate_u_spacetime,err_p_spacetime,"
         "rate_p_spacetime,div_max,div_l2,normal_jump\n";
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return std::string(buf);
  };
  const auto rate = [&](double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0)) return std::string();
    return num(std::log2(coarse / fine));
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    const DiagnosticsReport& r = rows[i].report;
    const DiagnosticsReport* prev = i > 0 ? &rows[i - 1].report : nullptr;
    out << rows[i].level << "," << rows[i].nx << "," << rows[i].num_slabs << ","
        << rows[i].cells_per_slab << ",";
    out << num(r.err_u_final) << ","
        << (prev ? rate(prev->err_u_final, r.err_u_final) : "") << ",";
    out << num(r.err_p_final) << ","
        << (prev ? rate(prev->err_p_final, r.err_p_final) : "") << ",";
    out << num(r.err_u_spacetime) << ","
        << (prev ? rate(prev->err_u_spacetime, r.err_u_spacetime) : "") << ",";
    out << num(r.err_p_spacetime) << ","
        << (prev ? rate(prev->err_p_spacetime, r.err_p_spacetime) : "") << ",";
    out << num(r.div_max) << "," << num(r.div_l2) << "," << num(r.normal_jump) << "\n";
  }
  if (!out) throw Error("write failure on " + path);
}

}  // namespace sthdg
