#include "sthdg/basis.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sthdg/errors.hpp"

namespace sthdg {

namespace {

// Exact factorials up to 19! (all representable in a 64-bit mantissa).
long double factorial_ld(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Eigen::MatrixXi graded_exponents(int dim, int degree) {
  std::vector<Eigen::VectorXi> list;
  for (int d = 0; d <= degree; ++d) {
    if (dim == 1) {
      Eigen::VectorXi e(1);
      e << d;
      list.push_back(e);
    } else if (dim == 2) {
      for (int a = d; a >= 0; --a) {
        Eigen::VectorXi e(2);
        e << a, d - a;
        list.push_back(e);
      }
    } else {
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) {
          Eigen::VectorXi e(3);
          e << a, b, d - a - b;
          list.push_back(e);
        }
    }
  }
  Eigen::MatrixXi out(static_cast<int>(list.size()), dim);
  for (size_t i = 0; i < list.size(); ++i) out.row(static_cast<int>(i)) = list[i];
  return out;
}

}  // namespace

double simplex_monomial_integral(int dim, const Eigen::VectorXi& exponents) {
  int sum = 0;
  long double num = 1.0L;
  for (int i = 0; i < exponents.size(); ++i) {
    num *= factorial_ld(exponents[i]);
    sum += exponents[i];
  }
  return static_cast<double>(num / factorial_ld(sum + dim));
}

BasisSet::BasisSet(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || dim > 3) throw UnsupportedDegree("basis dimension must be 1, 2, or 3");
  if (degree < 0 || degree > kMaxDegree)
    throw UnsupportedDegree("basis degree out of range: " + std::to_string(degree));
  exponents_ = graded_exponents(dim, degree);
  size_ = static_cast<int>(exponents_.rows());

  // Exact Gram matrix of the monomials.
  Eigen::MatrixXd G(size_, size_);
  for (int i = 0; i < size_; ++i)
    for (int j = 0; j <= i; ++j) {
      Eigen::VectorXi e = exponents_.row(i) + exponents_.row(j);
      G(i, j) = G(j, i) = simplex_monomial_integral(dim, e);
    }

  // Twice-iterated modified Gram-Schmidt in the G-inner product.  Columns of
  // coeffs_ stay upper triangular, preserving the graded flag of subspaces.
  coeffs_ = Eigen::MatrixXd::Zero(size_, size_);
  for (int i = 0; i < size_; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(size_, i);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) {
        const double r = coeffs_.col(j).dot(G * v);
        v -= r * coeffs_.col(j);
      }
    const double norm = std::sqrt(v.dot(G * v));
    if (!(norm > 0.0)) throw Error("basis orthonormalization broke down");
    coeffs_.col(i) = v / norm;
  }

  // Coefficients of each derivative: d/dx_d of monomial row j contributes
  // e_j[d] to the monomial with exponent row j minus one in slot d.
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < size_; ++i) {
    std::vector<int> key(dim_);
    for (int d = 0; d < dim_; ++d) key[d] = exponents_(i, d);
    index[key] = i;
  }
  for (int d = 0; d < dim_; ++d) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(size_, size_);
    for (int j = 0; j < size_; ++j) {
      if (exponents_(j, d) == 0) continue;
      std::vector<int> key(dim_);
      for (int c = 0; c < dim_; ++c) key[c] = exponents_(j, c);
      key[d] -= 1;
      D(index.at(key), j) = exponents_(j, d);
    }
    dcoeffs_[d] = D * coeffs_;
  }
}

int BasisSet::subspace_size(int subdegree) const {
  if (subdegree < 0) return 0;
  const int d = std::min(subdegree, degree_);
  // C(d + dim, dim)
  int n = 1;
  for (int i = 1; i <= dim_; ++i) n = n * (d + i) / i;
  return n;
}

Eigen::MatrixXd BasisSet::monomial_values(const Eigen::MatrixXd& points) const {
  const int N = static_cast<int>(points.rows());
  Eigen::MatrixXd M(N, size_);
  for (int q = 0; q < N; ++q) {
    // Powers of each coordinate up to the total degree.
    Eigen::MatrixXd pw(dim_, degree_ + 1);
    for (int d = 0; d < dim_; ++d) {
      pw(d, 0) = 1.0;
      for (int p = 1; p <= degree_; ++p) pw(d, p) = pw(d, p - 1) * points(q, d);
    }
    for (int i = 0; i < size_; ++i) {
      double v = 1.0;
      for (int d = 0; d < dim_; ++d) v *= pw(d, exponents_(i, d));
      M(q, i) = v;
    }
  }
  return M;
}

Eigen::MatrixXd BasisSet::values(const Eigen::MatrixXd& points) const {
  return monomial_values(points) * coeffs_;
}

Eigen::MatrixXd BasisSet::derivatives(const Eigen::MatrixXd& points, int d) const {
  return monomial_values(points) * dcoeffs_.at(d);
}

AffineMap AffineMap::from_tet(const Eigen::Matrix<double, 4, 3>& verts) {
  AffineMap map;
  map.b = verts.row(0).transpose();
  for (int c = 0; c < 3; ++c)
    map.A.col(c) = (verts.row(c + 1) - verts.row(0)).transpose();
  map.detA = map.A.determinant();
  if (!(map.detA > 0.0)) throw DegenerateMap("tetrahedron is degenerate or inverted");
  map.Ainv = map.A.inverse();
  return map;
}

AffineMap2 AffineMap2::from_triangle(const Eigen::Matrix<double, 3, 2>& verts) {
  AffineMap2 map = from_triangle_any(verts);
  if (!(map.detA > 0.0)) throw DegenerateMap("triangle is degenerate or flipped");
  return map;
}

AffineMap2 AffineMap2::from_triangle_any(const Eigen::Matrix<double, 3, 2>& verts) {
  AffineMap2 map;
  map.b = verts.row(0).transpose();
  for (int c = 0; c < 2; ++c)
    map.A.col(c) = (verts.row(c + 1) - verts.row(0)).transpose();
  map.detA = map.A.determinant();
  if (map.detA == 0.0 || !std::isfinite(map.detA))
    throw DegenerateMap("triangle is degenerate");
  map.Ainv = map.A.inverse();
  return map;
}

}  // namespace sthdg
