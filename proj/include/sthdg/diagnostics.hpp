#ifndef STHDG_DIAGNOSTICS_HPP
#define STHDG_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "sthdg/cases.hpp"
#include "sthdg/marching.hpp"

namespace sthdg {

/// Echo of the run parameters, written into every report.
struct RunConfig {
  std::string case_name;
  int degree = 2;
  int nx = 8;
  int num_slabs = 20;
  double dt = 0.05;
  double nu = 1e-4;
  double tol = 1e-12;
  double alpha_factor = 6.0;
  bool ale = false;
  std::string mesh_file;
};

/// All measured quantities of one completed march.
struct DiagnosticsReport {
  RunConfig config;

  bool has_exact = false;
  double err_u_final = 0.0;      ///< L2 velocity error on the final-time domain
  double err_p_final = 0.0;      ///< L2 pressure error on the final-time domain
  double err_u_spacetime = 0.0;  ///< L2 velocity error over all space-time cells
  double err_p_spacetime = 0.0;  ///< L2 pressure error over all space-time cells

  double div_max = 0.0;       ///< max pointwise divergence at quadrature points
  double div_l2 = 0.0;        ///< L2 norm of the divergence over space-time
  double normal_jump = 0.0;   ///< L2 norm of the normal velocity jumps
  double velocity_scale = 0.0;  ///< max |u_h| component seen at quadrature points

  double max_condensed_residual = 0.0;
  std::vector<double> slab_energies;  ///< |u|^2 integrals at levels 0..N
  std::vector<int> iterations;        ///< linear solves per slab

  double mesh_seconds = 0.0;
  double assembly_seconds = 0.0;
  double condensation_seconds = 0.0;
  double solve_seconds = 0.0;
  double backsub_seconds = 0.0;
};

/// Runs a case end to end and measures it.  When `vtk_dir` is nonempty, one
/// legacy VTK file per slab is written there; when `matrix_path` is nonempty,
/// the condensed matrix of the first slab's first solve is exported in
/// MatrixMarket format.
DiagnosticsReport run_case(const CaseSetup& setup, const MarchOptions& opt,
                           const std::string& vtk_dir = "",
                           const std::string& matrix_path = "");

/// Writes the full report as JSON.
void write_report_json(const DiagnosticsReport& report, const std::string& path);

/// One line of the convergence table.
struct RateRow {
  int level = 0;
  int nx = 0;
  int num_slabs = 0;
  int cells_per_slab = 0;
  DiagnosticsReport report;
};

/// Writes the convergence table; rates between consecutive levels are placed
/// on the finer row.  Output is deterministic for identical inputs.
void write_rates_csv(const std::vector<RateRow>& rows, const std::string& path);

}  // namespace sthdg

#endif  // STHDG_DIAGNOSTICS_HPP
