#include "sthdg/cases.hpp"

#include <cmath>

#include "sthdg/errors.hpp"

namespace sthdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector2d manufactured_velocity(const Eigen::Vector3d& X) {
  const double E = std::exp(X[2]) - 1.0;
  return {E * std::sin(kPi * X[0]) * std::sin(kPi * X[1]),
          E * std::cos(kPi * X[0]) * std::cos(kPi * X[1])};
}

double manufactured_pressure(const Eigen::Vector3d& X) {
  return (2.0 + std::cos(X[2])) * std::sin(kPi * X[0]) * std::cos(kPi * X[1]);
}

Eigen::Vector2d manufactured_forcing(const Eigen::Vector3d& X, double nu) {
  const double t = X[2];
  const double E = std::exp(t) - 1.0;
  const double s1 = std::sin(kPi * X[0]), c1 = std::cos(kPi * X[0]);
  const double s2 = std::sin(kPi * X[1]), c2 = std::cos(kPi * X[1]);
  const double pt = 2.0 + std::cos(t);
  const double f1 = std::exp(t) * s1 * s2 + kPi * E * E * s1 * c1 +
                    pt * kPi * c1 * c2 + 2.0 * nu * kPi * kPi * E * s1 * s2;
  const double f2 = std::exp(t) * c1 * c2 - kPi * E * E * s2 * c2 -
                    pt * kPi * s1 * s2 + 2.0 * nu * kPi * kPi * E * c1 * c2;
  return {f1, f2};
}

Eigen::Vector2d manufactured_neumann(const Eigen::Vector3d& X, double nu) {
  // On the outflow plane x = 1 the solution satisfies u.n = 0 and p = 0, so
  // only the viscous normal-gradient term survives.
  const double E = std::exp(X[2]) - 1.0;
  return {nu * kPi * E * std::sin(kPi * X[1]), 0.0};
}

Eigen::Vector2d vortex_initial(const Eigen::Vector2d& x) {
  const double a = x[0] * (1.0 - x[0]);
  const double b = x[1] * (1.0 - x[1]);
  return {2.0 * a * a * b * (1.0 - 2.0 * x[1]),
          -2.0 * a * (1.0 - 2.0 * x[0]) * b * b};
}

}  // namespace

CaseSetup make_case(const std::string& name, int nx, double nu,
                    const std::string& mesh_file) {
  CaseSetup setup;
  setup.name = name;

  if (name == "manufactured" || name == "uniform-flow" || name == "energy-decay") {
    setup.problem.mesh = uniform_unit_square(nx);
    setup.problem.motion = DomainMotion::traveling_wave();
  } else if (name == "external-mesh") {
    if (mesh_file.empty()) throw Error("case external-mesh requires a mesh file");
    setup.problem.mesh = read_mesh(mesh_file);
    setup.problem.motion = DomainMotion::none();
  } else {
    throw Error("unknown case: " + name);
  }
  setup.problem.edges = build_edges(setup.problem.mesh);

  if (name == "manufactured") {
    // Outflow on x = 1 (tag 1), prescribed velocity elsewhere.
    setup.problem.bc_of_tag = {{0, BoundaryKind::Dirichlet},
                               {1, BoundaryKind::Neumann},
                               {2, BoundaryKind::Dirichlet},
                               {3, BoundaryKind::Dirichlet}};
    setup.problem.data.forcing = [nu](const Eigen::Vector3d& X) {
      return manufactured_forcing(X, nu);
    };
    setup.problem.data.neumann = [nu](const Eigen::Vector3d& X) {
      return manufactured_neumann(X, nu);
    };
    setup.problem.dirichlet = manufactured_velocity;
    setup.problem.initial = nullptr;  // the exact solution vanishes at t = 0
    setup.has_exact = true;
    setup.exact_velocity = manufactured_velocity;
    setup.exact_pressure = manufactured_pressure;
  } else if (name == "uniform-flow") {
    const Eigen::Vector2d c(1.0, 0.3);
    setup.problem.bc_of_tag = {{0, BoundaryKind::Dirichlet},
                               {1, BoundaryKind::Neumann},
                               {2, BoundaryKind::Dirichlet},
                               {3, BoundaryKind::Dirichlet}};
    setup.problem.dirichlet = [c](const Eigen::Vector3d&) { return c; };
    setup.problem.initial = [c](const Eigen::Vector2d&) { return c; };
    setup.has_exact = true;
    setup.exact_velocity = [c](const Eigen::Vector3d&) { return c; };
    setup.exact_pressure = [](const Eigen::Vector3d&) { return 0.0; };
  } else if (name == "energy-decay") {
    setup.problem.bc_of_tag = {{0, BoundaryKind::Dirichlet},
                               {1, BoundaryKind::Dirichlet},
                               {2, BoundaryKind::Dirichlet},
                               {3, BoundaryKind::Dirichlet}};
    setup.problem.initial = vortex_initial;
    setup.pressure_gauge_free = true;
  } else {  // external-mesh
    for (int tag : setup.problem.mesh.boundary_tags)
      setup.problem.bc_of_tag[tag] = BoundaryKind::Dirichlet;
    setup.problem.data.forcing = [nu](const Eigen::Vector3d& X) {
      return manufactured_forcing(X, nu);
    };
    setup.problem.dirichlet = manufactured_velocity;
    setup.problem.initial = nullptr;
    setup.has_exact = true;
    setup.exact_velocity = manufactured_velocity;
    setup.exact_pressure = manufactured_pressure;
    setup.pressure_gauge_free = true;
  }

  return setup;
}

}  // namespace sthdg
