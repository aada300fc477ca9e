#ifndef STHDG_CASES_HPP
#define STHDG_CASES_HPP

#include <string>

#include "sthdg/marching.hpp"

namespace sthdg {

/// A ready-to-march problem plus (when known) its exact solution.
struct CaseSetup {
  std::string name;
  Problem problem;
  bool has_exact = false;
  std::function<Eigen::Vector2d(const Eigen::Vector3d&)> exact_velocity;
  std::function<double(const Eigen::Vector3d&)> exact_pressure;
  /// True when the facet pressure is pinned (no outflow boundary), so
  /// pressure errors are gauge-adjusted by their mean.
  bool pressure_gauge_free = false;
};

/// Builds one of the named benchmark cases:
///  - "manufactured": deforming unit square, smooth forced solution with an
///    outflow boundary on x = 1;
///  - "uniform-flow": constant velocity on the same deforming mesh;
///  - "energy-decay": unforced flow with homogeneous Dirichlet walls and a
///    smooth divergence-free initial vortex on the same deforming mesh;
///  - "external-mesh": the manufactured data on a static mesh read from
///    `mesh_file`, all-Dirichlet boundary.
/// `nx` selects the structured resolution (ignored for "external-mesh").
CaseSetup make_case(const std::string& name, int nx, double nu,
                    const std::string& mesh_file = "");

}  // namespace sthdg

#endif  // STHDG_CASES_HPP
