#ifndef STHDG_MARCHING_HPP
#define STHDG_MARCHING_HPP

#include <functional>
#include <map>
#include <vector>

#include "sthdg/forms.hpp"
#include "sthdg/geometry.hpp"
#include "sthdg/linear_system.hpp"

namespace sthdg {

/// Everything that defines one flow problem on the moving domain.
struct Problem {
  SpatialMesh mesh;
  std::vector<EdgeInfo> edges;
  DomainMotion motion;
  std::map<int, BoundaryKind> bc_of_tag;
  ProblemData data;
  /// Dirichlet boundary velocity (x, y, t); nullptr means zero.
  std::function<Eigen::Vector2d(const Eigen::Vector3d&)> dirichlet;
  /// Initial velocity at the start time; nullptr means zero.
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> initial;
};

/// Wraps a tag -> kind table as the lookup callback build_layout expects.
/// The returned function throws InconsistentTopology on an unknown tag.
std::function<BoundaryKind(int)> bc_lookup(const std::map<int, BoundaryKind>& bc_of_tag);

struct MarchOptions {
  int degree = 2;
  double t_begin = 0.0;
  double dt = 0.05;
  int num_slabs = 20;
  double nu = 1e-4;
  double tol = 1e-12;
  int max_iterations = 50;
  double alpha_factor = 6.0;
  bool ale = false;
};

/// Outcome of one slab: fixed-point iteration counts and solver stats
/// accumulated over all iterations of the slab.
struct SlabResult {
  int slab = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  int iterations = 0;  ///< total linear solves (seed included)
  double rel_delta_u = 0.0;
  double rel_delta_p = 0.0;
  double condensed_residual = 0.0;  ///< of the accepted iterate
  SolveStats stats;
};

/// Called after each slab with the slab's mesh, layout, tables, converged
/// state, and result record; used to accumulate diagnostics without storing
/// every slab.
using SlabObserver =
    std::function<void(const SlabMesh&, const DofLayout&, const ReferenceTables&,
                       const SlabState&, const SlabResult&)>;

struct MarchSummary {
  std::vector<SlabResult> slabs;
  std::vector<double> trace_energy;  ///< |u|^2 integral at levels 0..num_slabs
  TraceField final_trace;
  Eigen::MatrixXd final_positions;
  double mesh_seconds = 0.0;  ///< extrusion + layout + boundary data
};

/// Physical areas of all triangles for given vertex positions.
Eigen::VectorXd triangle_areas(const SpatialMesh& mesh, const Eigen::MatrixXd& positions);

/// Exact projection of the top-level velocity trace of a slab solution onto
/// the per-triangle trace representation used to start the next slab.
TraceField extract_top_trace(const SlabMesh& mesh, const ReferenceTables& ref,
                             const SlabState& state);

/// Projects an initial velocity onto the divergence-free, normal-continuous
/// broken polynomial space on the given vertex positions.  The input is
/// screened with finite differences and must be divergence-free; violations
/// raise InvalidInitialCondition.  A null function yields the zero trace.
TraceField project_initial(const SpatialMesh& mesh, const std::vector<EdgeInfo>& edges,
                           const Eigen::MatrixXd& positions, int degree,
                           const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& u0);

/// Solves one slab by the damped fixed-point iteration on the advecting
/// field: the first solve uses a zero advecting field, subsequent solves use
/// the previous iterate.  Throws NoConvergence when the iteration limit is
/// reached.
SlabState solve_slab(const SlabMesh& mesh, const DofLayout& layout,
                     const ReferenceTables& ref, const MarchOptions& opt,
                     const ProblemData& data, const TraceField* bottom,
                     SlabResult* result);

/// Drives all slabs of a problem from the initial trace to the final time.
MarchSummary march(const Problem& problem, const MarchOptions& opt,
                   const SlabObserver& observer = nullptr);

}  // namespace sthdg

#endif  // STHDG_MARCHING_HPP
