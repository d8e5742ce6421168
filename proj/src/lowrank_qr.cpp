#include "dfsane/lowrank_qr.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfsane {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kDriftCheckPeriod = 64;

}  // namespace

UpdatableQR::UpdatableQR(Index rows, Index capacity, double rank_tol)
    : n_(rows), cap_(capacity), rank_tol_(rank_tol) {
  if (rows <= 0) throw std::invalid_argument("UpdatableQR: row count must be positive");
  if (capacity <= 0) throw std::invalid_argument("UpdatableQR: capacity must be positive");
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
    throw std::invalid_argument("UpdatableQR: rank tolerance must lie in (0, 1)");
  }
  const Index max_r = std::min(n_, cap_);
  q_ = Matrix::Zero(n_, max_r);
  r_mat_ = Matrix::Zero(max_r, cap_);
}

UpdatableQR UpdatableQR::from_columns(Index rows, std::span<const Vector> cols, Index capacity,
                                      double rank_tol) {
  const Index cap = capacity < 0 ? std::max<Index>(1, static_cast<Index>(cols.size())) : capacity;
  UpdatableQR qr(rows, cap, rank_tol);
  for (const auto& c : cols) qr.append_column(c);
  return qr;
}

void UpdatableQR::append_column(const Vector& col) {
  if (col.size() != n_) throw std::invalid_argument("UpdatableQR: column has wrong dimension");
  if (m_ >= cap_) throw std::length_error("UpdatableQR: capacity exceeded");

  if (r_ < n_) {
    const auto q = q_.leftCols(r_);
    Vector coeff = q.transpose() * col;
    Vector w = col - q * coeff;
    const double col_norm = col.norm();
    double prev = col_norm;
    double w_norm = w.norm();
    // Re-project while the remainder keeps collapsing.
    for (int pass = 0; pass < 2 && w_norm < 0.5 * prev; ++pass) {
      const Vector delta = q.transpose() * w;
      w -= q * delta;
      coeff += delta;
      prev = w_norm;
      w_norm = w.norm();
    }

    r_mat_.col(m_).head(r_) = coeff;
    r_mat_.row(r_).head(m_ + 1).setZero();
    if (w_norm > 64.0 * kEps * col_norm) {
      q_.col(r_) = w / w_norm;
      r_mat_(r_, m_) = w_norm;
    } else {
      // Dependent column: R gets a zero pivot, Q still needs an orthonormal column.
      q_.col(r_) = orthogonal_complement_direction();
    }
    ++r_;
  } else {
    r_mat_.col(m_).head(n_) = q_.transpose() * col;
  }
  ++m_;
  after_update();
}

void UpdatableQR::remove_leftmost() {
  if (m_ == 0) throw std::logic_error("UpdatableQR: remove_leftmost on empty factorization");
  const Index m_new = m_ - 1;
  for (Index j = 0; j < m_new; ++j) r_mat_.col(j).head(r_) = r_mat_.col(j + 1).head(r_);

  // R is now upper Hessenberg; rotate the subdiagonal away.
  for (Index j = 0; j < m_new && j + 1 < r_; ++j) {
    const double a = r_mat_(j, j);
    const double b = r_mat_(j + 1, j);
    if (b == 0.0) continue;
    const double rho = std::hypot(a, b);
    const double c = a / rho;
    const double s = b / rho;
    for (Index k = j; k < m_new; ++k) {
      const double t1 = r_mat_(j, k);
      const double t2 = r_mat_(j + 1, k);
      r_mat_(j, k) = c * t1 + s * t2;
      r_mat_(j + 1, k) = -s * t1 + c * t2;
    }
    r_mat_(j, j) = rho;
    r_mat_(j + 1, j) = 0.0;
    for (Index i = 0; i < n_; ++i) {
      const double t1 = q_(i, j);
      const double t2 = q_(i, j + 1);
      q_(i, j) = c * t1 + s * t2;
      q_(i, j + 1) = -s * t1 + c * t2;
    }
  }
  m_ = m_new;
  r_ = std::min(r_, m_);
  after_update();
}

void UpdatableQR::remove_rightmost() {
  if (m_ == 0) throw std::logic_error("UpdatableQR: remove_rightmost on empty factorization");
  --m_;
  r_ = std::min(r_, m_);
  after_update();
}

void UpdatableQR::replace_rightmost(const Vector& col) {
  if (m_ == 0) throw std::logic_error("UpdatableQR: replace_rightmost on empty factorization");
  if (col.size() != n_) throw std::invalid_argument("UpdatableQR: column has wrong dimension");
  remove_rightmost();
  append_column(col);
}

void UpdatableQR::clear() {
  m_ = 0;
  r_ = 0;
  rank_ = 0;
}

Vector UpdatableQR::min_norm_solve(const Vector& rhs) const {
  if (m_ == 0) throw std::logic_error("UpdatableQR: min_norm_solve on empty factorization");
  if (rhs.size() != n_) throw std::invalid_argument("UpdatableQR: right-hand side has wrong dimension");

  const Vector qtb = Q().transpose() * rhs;
  if (rank_ == 0) return Vector::Zero(m_);
  if (rank_ == m_ && r_ == m_) {
    return r_mat_.topLeftCorner(m_, m_).triangularView<Eigen::Upper>().solve(qtb);
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(rank_tol_);
  cod.compute(R());
  return cod.solve(qtb);
}

Matrix UpdatableQR::reconstruct() const {
  if (m_ == 0) return Matrix::Zero(n_, 0);
  return Q() * R();
}

double UpdatableQR::orthogonality_error() const {
  if (r_ == 0) return 0.0;
  return (Q().transpose() * Q() - Matrix::Identity(r_, r_)).norm();
}

void UpdatableQR::refresh_rank() {
  if (m_ == 0) {
    rank_ = 0;
    return;
  }
  const Eigen::ColPivHouseholderQR<Matrix> pivoted(R());
  const Vector pivots = pivoted.matrixQR().diagonal().cwiseAbs();
  if (!(pivots(0) > 0.0)) {
    rank_ = 0;
    return;
  }
  Index rank = 0;
  while (rank < pivots.size() && pivots(rank) > rank_tol_ * pivots(0)) ++rank;
  rank_ = rank;
}

void UpdatableQR::after_update() {
  if (++updates_since_check_ >= kDriftCheckPeriod) {
    updates_since_check_ = 0;
    if (orthogonality_error() > 1e-12 * static_cast<double>(std::max<Index>(1, r_))) {
      reorthogonalize();
    }
  }
  refresh_rank();
}

void UpdatableQR::reorthogonalize() {
  if (r_ == 0) return;
  const Eigen::HouseholderQR<Matrix> h(q_.leftCols(r_));
  Matrix t = h.matrixQR().topLeftCorner(r_, r_).triangularView<Eigen::Upper>();
  Matrix q_new = h.householderQ() * Matrix::Identity(n_, r_);
  for (Index i = 0; i < r_; ++i) {
    if (t(i, i) < 0.0) {
      t.row(i) *= -1.0;
      q_new.col(i) *= -1.0;
    }
  }
  q_.leftCols(r_) = q_new;
  const Matrix r_new = t.triangularView<Eigen::Upper>() * R();
  r_mat_.topLeftCorner(r_, m_) = r_new;
  for (Index j = 0; j < m_; ++j) {
    for (Index i = j + 1; i < r_; ++i) r_mat_(i, j) = 0.0;
  }
}

Vector UpdatableQR::orthogonal_complement_direction() const {
  // Project canonical vectors off span(Q); any with a healthy remainder will do.
  const auto q = q_.leftCols(r_);
  Vector best;
  double best_norm = -1.0;
  for (Index j = 0; j < n_; ++j) {
    Vector e = Vector::Zero(n_);
    e(j) = 1.0;
    for (int pass = 0; pass < 2; ++pass) e -= q * (q.transpose() * e);
    const double nrm = e.norm();
    if (nrm > best_norm) {
      best_norm = nrm;
      best = std::move(e);
    }
    if (best_norm * best_norm >= 0.5) break;
  }
  return best / best_norm;
}

}  // namespace dfsane
