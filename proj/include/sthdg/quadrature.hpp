#ifndef STHDG_QUADRATURE_HPP
#define STHDG_QUADRATURE_HPP

#include <Eigen/Dense>

namespace sthdg {

/// Quadrature rule on a reference domain (unit interval, unit triangle
/// {x,y>=0, x+y<=1}, or unit tetrahedron {x,y,z>=0, x+y+z<=1}).
struct QuadratureRule {
  Eigen::MatrixXd points;   ///< N x dim point coordinates
  Eigen::VectorXd weights;  ///< N positive weights summing to the measure
  int exactness = 0;        ///< exact for polynomials up to this total degree

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// n-point Gauss-Jacobi rule for \int_0^1 f(x) (1-x)^alpha dx, exact for
/// polynomials f of degree <= 2n-1.  Nodes/weights via the Golub-Welsch
/// eigenvalue method.  alpha must be a non-negative integer (0, 1, 2 used).
void gauss_jacobi(int n, int alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Gauss-Legendre rule on [0,1] exact for the requested total degree.
QuadratureRule interval_rule(int exactness);

/// Conical-product rule on the reference triangle exact for the requested
/// total degree.
QuadratureRule triangle_rule(int exactness);

/// Conical-product rule on the reference tetrahedron exact for the requested
/// total degree.
QuadratureRule tet_rule(int exactness);

/// Largest supported exactness for the rules above.
inline constexpr int kMaxExactness = 30;

}  // namespace sthdg

#endif  // STHDG_QUADRATURE_HPP
