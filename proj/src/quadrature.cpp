#include "sthdg/quadrature.hpp"

#include <cmath>
#include <string>

#include "sthdg/errors.hpp"

namespace sthdg {

namespace {

int points_per_direction(int exactness) {
  if (exactness < 0 || exactness > kMaxExactness)
    throw UnsupportedDegree("quadrature exactness out of range: " +
                            std::to_string(exactness));
  return exactness / 2 + 1;  // 2n-1 >= exactness
}

}  // namespace

void gauss_jacobi(int n, int alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw UnsupportedDegree("gauss_jacobi: need at least one point");
  if (alpha < 0) throw UnsupportedDegree("gauss_jacobi: alpha must be >= 0");
  const double a = alpha;
  // Monic three-term recurrence for Jacobi weight (1-x)^alpha on [-1,1].
  Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a;
    diag[k] = (alpha == 0) ? 0.0 : (k == 0 ? -a / (a + 2.0) : -a * a / (s * (s + 2.0)));
    if (k >= 1) {
      const double num = 2.0 * k * (k + a) / s;
      off[k - 1] = std::sqrt(num * num / ((s + 1.0) * (s - 1.0)));
    }
  }
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  J.diagonal() = diag;
  if (n > 1) {
    J.diagonal(1) = off;
    J.diagonal(-1) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  // Weight on [-1,1] is mu0 * v0^2; the affine map to [0,1] divides the
  // Jacobi-weighted measure by 2^{alpha+1}.
  const double scale = mu0 / std::pow(2.0, a + 1.0);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = scale * v0 * v0;
  }
}

QuadratureRule interval_rule(int exactness) {
  const int n = points_per_direction(exactness);
  Eigen::VectorXd x, w;
  gauss_jacobi(n, 0, x, w);
  QuadratureRule rule;
  rule.points = x;
  rule.weights = w;
  rule.exactness = 2 * n - 1;
  return rule;
}

QuadratureRule triangle_rule(int exactness) {
  const int n = points_per_direction(exactness);
  Eigen::VectorXd x0, w0, x1, w1;
  gauss_jacobi(n, 0, x0, w0);
  gauss_jacobi(n, 1, x1, w1);
  QuadratureRule rule;
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  int q = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i, ++q) {
      // Collapsed-coordinate map: (xi, eta) -> (xi (1-eta), eta).
      rule.points(q, 0) = x0[i] * (1.0 - x1[j]);
      rule.points(q, 1) = x1[j];
      rule.weights[q] = w0[i] * w1[j];
    }
  rule.exactness = 2 * n - 1;
  return rule;
}

QuadratureRule tet_rule(int exactness) {
  const int n = points_per_direction(exactness);
  Eigen::VectorXd x0, w0, x1, w1, x2, w2;
  gauss_jacobi(n, 0, x0, w0);
  gauss_jacobi(n, 1, x1, w1);
  gauss_jacobi(n, 2, x2, w2);
  QuadratureRule rule;
  rule.points.resize(n * n * n, 3);
  rule.weights.resize(n * n * n);
  int q = 0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i, ++q) {
        // (xi, eta, zeta) -> (xi (1-eta)(1-zeta), eta (1-zeta), zeta).
        rule.points(q, 0) = x0[i] * (1.0 - x1[j]) * (1.0 - x2[k]);
        rule.points(q, 1) = x1[j] * (1.0 - x2[k]);
        rule.points(q, 2) = x2[k];
        rule.weights[q] = w0[i] * w1[j] * w2[k];
      }
  rule.exactness = 2 * n - 1;
  return rule;
}

}  // namespace sthdg
