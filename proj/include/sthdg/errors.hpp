#ifndef STHDG_ERRORS_HPP
#define STHDG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sthdg {

/// Base class for all solver errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Domain motion produced tangled or inverted spatial elements.
struct InvalidMotion : Error {
  using Error::Error;
};

/// A space-time cell has non-positive volume.
struct DegenerateCell : Error {
  using Error::Error;
};

/// Mesh connectivity is inconsistent (bad facet/cell incidence).
struct InconsistentTopology : Error {
  using Error::Error;
};

/// Requested polynomial degree is outside the supported range.
struct UnsupportedDegree : Error {
  using Error::Error;
};

/// Reference-to-physical map is singular or orientation-reversing.
struct DegenerateMap : Error {
  using Error::Error;
};

/// A per-cell block could not be factorized during condensation.
struct SingularLocalBlock : Error {
  using Error::Error;
};

/// The condensed global system could not be factorized.
struct SingularGlobal : Error {
  using Error::Error;
};

/// The constrained initial-projection system could not be factorized.
struct ProjectionSingular : Error {
  using Error::Error;
};

/// Supplied initial velocity field fails the divergence screen.
struct InvalidInitialCondition : Error {
  using Error::Error;
};

/// Fixed-point iteration failed to reach tolerance within the iteration cap.
struct NoConvergence : Error {
  NoConvergence(const std::string& what, int iters, double du, double dp)
      : Error(what), iterations(iters), delta_u(du), delta_p(dp) {}
  int iterations;
  double delta_u;
  double delta_p;
};

}  // namespace sthdg

#endif  // STHDG_ERRORS_HPP
