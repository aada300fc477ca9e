#ifndef STHDG_BASIS_HPP
#define STHDG_BASIS_HPP

#include <Eigen/Dense>
#include <array>

namespace sthdg {

/// Exact integral of the monomial prod_i x_i^e_i over the unit simplex of the
/// given dimension (interval, triangle, tetrahedron):
///   prod_i e_i! / (sum_i e_i + dim)!
double simplex_monomial_integral(int dim, const Eigen::VectorXi& exponents);

/// Hierarchical orthonormal polynomial basis on the unit reference simplex.
///
/// Monomials are ordered by total degree (graded), then lexicographically by
/// decreasing leading exponent within each degree.  Orthonormalization uses
/// twice-iterated modified Gram-Schmidt under the exact monomial Gram matrix,
/// so the basis is L2-orthonormal to machine precision and the span of the
/// first subspace_size(d) functions is exactly the polynomials of degree <= d.
class BasisSet {
 public:
  /// dim in {1,2,3}, degree in [0, kMaxDegree].
  BasisSet(int dim, int degree);

  static constexpr int kMaxDegree = 8;

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return size_; }

  /// Number of basis functions spanning polynomials of degree <= subdegree.
  int subspace_size(int subdegree) const;

  /// Basis values at reference points (N x dim); result is N x size().
  Eigen::MatrixXd values(const Eigen::MatrixXd& points) const;

  /// Partial derivative values in reference direction d (0 <= d < dim);
  /// result is N x size().
  Eigen::MatrixXd derivatives(const Eigen::MatrixXd& points, int d) const;

 private:
  Eigen::MatrixXd monomial_values(const Eigen::MatrixXd& points) const;

  int dim_;
  int degree_;
  int size_;
  Eigen::MatrixXi exponents_;               ///< size x dim, graded order
  Eigen::MatrixXd coeffs_;                  ///< size x size, basis = monomials * coeffs
  std::array<Eigen::MatrixXd, 3> dcoeffs_;  ///< coefficients of the derivatives
};

/// Affine map X = A xi + b from the reference tetrahedron to a physical cell.
struct AffineMap {
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
  Eigen::Matrix3d Ainv;
  double detA = 0.0;  ///< positive; cell volume is detA / 6

  /// Builds the map from the four vertex positions (rows).  Throws
  /// DegenerateMap unless the vertex order is positively oriented.
  static AffineMap from_tet(const Eigen::Matrix<double, 4, 3>& verts);

  Eigen::Vector3d apply(const Eigen::Vector3d& xi) const { return A * xi + b; }
};

/// Affine map from the reference triangle to a physical triangle in the plane.
struct AffineMap2 {
  Eigen::Matrix2d A;
  Eigen::Vector2d b;
  Eigen::Matrix2d Ainv;
  double detA = 0.0;  ///< signed; triangle area is |detA| / 2

  /// Builds the map from the three vertex positions (rows).  Throws
  /// DegenerateMap unless the vertex order is counterclockwise.
  static AffineMap2 from_triangle(const Eigen::Matrix<double, 3, 2>& verts);

  /// Like from_triangle, but accepts either orientation; only degenerate
  /// triangles throw.
  static AffineMap2 from_triangle_any(const Eigen::Matrix<double, 3, 2>& verts);

  Eigen::Vector2d apply(const Eigen::Vector2d& xi) const { return A * xi + b; }
};

}  // namespace sthdg

#endif  // STHDG_BASIS_HPP
