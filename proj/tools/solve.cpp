#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sthdg/cases.hpp"
#include "sthdg/diagnostics.hpp"
#include "sthdg/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Space-time hybridized solver for incompressible flow on moving meshes"};

  std::string case_name = "manufactured";
  int degree = 2;
  int nx = 8;
  int slabs = 20;
  double dt = 0.05;
  double nu = 1e-4;
  double tol = 1e-12;
  int max_iterations = 50;
  double alpha_factor = 6.0;
  int levels = 1;
  std::string out_dir = ".";
  std::string mesh_file;
  std::string matrix_file;
  bool ale = false;
  bool vtk = false;

  app.add_option("--case", case_name, "manufactured | uniform-flow | energy-decay | external-mesh")
      ->check(CLI::IsMember({"manufactured", "uniform-flow", "energy-decay", "external-mesh"}));
  app.add_option("--k", degree, "polynomial degree (1..4)")->check(CLI::Range(1, 4));
  app.add_option("--nx", nx, "structured mesh resolution at level 0")->check(CLI::PositiveNumber);
  app.add_option("--slabs", slabs, "number of time slabs at level 0")->check(CLI::PositiveNumber);
  app.add_option("--dt", dt, "slab height at level 0")->check(CLI::PositiveNumber);
  app.add_option("--nu", nu, "kinematic viscosity")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "fixed-point stopping tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iterations", max_iterations, "fixed-point iteration cap per slab")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha-factor", alpha_factor, "penalty = factor * k^2")
      ->check(CLI::PositiveNumber);
  app.add_option("--levels", levels, "refinement levels (level l uses nx*2^l, slabs*2^l)")
      ->check(CLI::Range(1, 6));
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--mesh", mesh_file, "spatial mesh file for --case external-mesh");
  app.add_option("--export-matrix", matrix_file,
                 "write the condensed matrix of the first slab (MatrixMarket)");
  app.add_flag("--ale", ale, "use the ALE form of the convective terms");
  app.add_flag("--vtk", vtk, "write slab_####.vtk files for the last level");

  CLI11_PARSE(app, argc, argv);

  try {
    if (case_name == "external-mesh" && levels > 1)
      throw sthdg::Error("--levels > 1 requires a structured case");
    std::filesystem::create_directories(out_dir);

    std::vector<sthdg::RateRow> rows;
    for (int level = 0; level < levels; ++level) {
      const int nx_l = nx << level;
      const int slabs_l = slabs << level;
      const double dt_l = dt / static_cast<double>(1 << level);
      const bool last = level == levels - 1;

      sthdg::CaseSetup setup = sthdg::make_case(case_name, nx_l, nu, mesh_file);
      sthdg::MarchOptions opt;
      opt.degree = degree;
      opt.dt = dt_l;
      opt.num_slabs = slabs_l;
      opt.nu = nu;
      opt.tol = tol;
      opt.max_iterations = max_iterations;
      opt.alpha_factor = alpha_factor;
      opt.ale = ale;

      sthdg::DiagnosticsReport report = sthdg::run_case(
          setup, opt, last && vtk ? out_dir : std::string(),
          last && !matrix_file.empty() ? out_dir + "/" + matrix_file : std::string());
      report.config.nx = nx_l;
      report.config.mesh_file = mesh_file;

      sthdg::RateRow row;
      row.level = level;
      row.nx = nx_l;
      row.num_slabs = slabs_l;
      row.cells_per_slab = 3 * setup.problem.mesh.num_triangles();
      row.report = report;
      rows.push_back(row);

      std::printf("level %d: %d cells/slab, %d slabs\n", level, row.cells_per_slab,
                  slabs_l);
      if (report.has_exact) {
        std::printf("  final-time errors:  u %.6e   p %.6e\n", report.err_u_final,
                    report.err_p_final);
        std::printf("  space-time errors:  u %.6e   p %.6e\n", report.err_u_spacetime,
                    report.err_p_spacetime);
      }
      std::printf("  div_max %.3e  div_l2 %.3e  normal_jump %.3e\n", report.div_max,
                  report.div_l2, report.normal_jump);
      std::printf("  timings [s]: mesh %.2f  assembly %.2f  condensation %.2f  solve %.2f"
                  "  back-substitution %.2f\n",
                  report.mesh_seconds, report.assembly_seconds,
                  report.condensation_seconds, report.solve_seconds,
                  report.backsub_seconds);

      if (last) sthdg::write_report_json(report, out_dir + "/report.json");
    }

    sthdg::write_rates_csv(rows, out_dir + "/rates.csv");
    if (rows.size() > 1 && rows.back().report.has_exact) {
      for (size_t i = 1; i < rows.size(); ++i) {
        const double r = std::log2(rows[i - 1].report.err_u_final /
                                   rows[i].report.err_u_final);
        std::printf("rate (level %zu -> %zu): velocity %.2f\n", i - 1, i, r);
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
