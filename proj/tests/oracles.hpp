#pragma once

// Reference computations used as independent oracles by the tests. None of
// them share code with the library kernels.

#include "dfsane/problem.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <deque>
#include <random>
#include <vector>

namespace oracle {

using dfsane::Index;
using dfsane::Matrix;
using dfsane::Vector;

inline Matrix stack(const std::deque<Vector>& cols, Index rows) {
  Matrix y(rows, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) y.col(static_cast<Index>(j)) = cols[j];
  return y;
}

// Moore-Penrose solution via a full SVD with a relative singular-value cutoff.
inline Vector pinv_solve(const Matrix& Y, const Vector& rhs, double rel_tol = 1.4901161193847656e-08) {
  Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector w = Vector::Zero(Y.cols());
  if (s.size() == 0 || s(0) == 0.0) return w;
  const Vector ut_b = svd.matrixU().transpose() * rhs;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) w += svd.matrixV().col(i) * (ut_b(i) / s(i));
  }
  return w;
}

inline Index svd_rank(const Matrix& Y, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(Y);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) r += s(i) > rel_tol * s(0) ? 1 : 0;
  return r;
}

// Null-space basis of Y from the SVD (columns of V beyond the numerical rank).
inline Matrix svd_null_space(const Matrix& Y, double rel_tol = 1.4901161193847656e-08) {
  Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeFullV);
  const Index r = svd_rank(Y, rel_tol);
  return svd.matrixV().rightCols(Y.cols() - r);
}

// Householder R of Y from scratch, rows normalized to a nonnegative diagonal.
inline Matrix rebuild_R(const Matrix& Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  const Index r = std::min(Y.rows(), Y.cols());
  Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Index i = 0; i < r; ++i) {
    if (R(i, i) < 0.0) R.row(i) *= -1.0;
  }
  return R;
}

// Cramer's rule for a 2x2 system.
inline Vector solve2x2(const Matrix& A, const Vector& b) {
  const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  Vector x(2);
  x(0) = (b(0) * A(1, 1) - A(0, 1) * b(1)) / det;
  x(1) = (A(0, 0) * b(1) - b(0) * A(1, 0)) / det;
  return x;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// Random matrix with singular values in [1, cond].
inline Matrix well_conditioned(std::mt19937_64& rng, Index n, double cond = 10.0) {
  Matrix G(n, n);
  for (Index j = 0; j < n; ++j) G.col(j) = random_vector(rng, n);
  Eigen::HouseholderQR<Matrix> q1(G);
  for (Index j = 0; j < n; ++j) G.col(j) = random_vector(rng, n);
  Eigen::HouseholderQR<Matrix> q2(G);
  Vector s = Vector::LinSpaced(n, 1.0, cond);
  return Matrix(q1.householderQ()) * s.asDiagonal() * Matrix(q2.householderQ()).transpose();
}

// Symmetric positive definite matrix with eigenvalues in [1, cond].
inline Matrix spd(std::mt19937_64& rng, Index n, double cond = 10.0) {
  Matrix G(n, n);
  for (Index j = 0; j < n; ++j) G.col(j) = random_vector(rng, n);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  const Vector s = Vector::LinSpaced(n, 1.0, cond);
  return Q * s.asDiagonal() * Q.transpose();
}

}  // namespace oracle
