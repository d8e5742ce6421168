#pragma once

#include "dfsane/problem.hpp"

#include <span>

namespace dfsane {

/// Thin QR factorization Y = Q R of a tall n x m matrix, kept current while
/// columns are appended on the right, dropped on the left, or the rightmost
/// column is replaced.
///
/// Q is n x r with orthonormal columns and R is r x m upper trapezoidal,
/// r = min(n, m). The live factorization is unpivoted; rank queries and
/// minimum-norm solves run a column-pivoted factorization of the small R.
///
/// Append costs O(n m), removals O(n m) via plane rotations, rank O(m^3).
class UpdatableQR {
 public:
  /// sqrt of double machine epsilon.
  static constexpr double kDefaultRankTol = 1.4901161193847656e-08;

  UpdatableQR(Index rows, Index capacity, double rank_tol = kDefaultRankTol);

  /// Factorizes the given columns from scratch in O(n m^2). capacity < 0 means
  /// "exactly as many columns as given" (at least one).
  static UpdatableQR from_columns(Index rows, std::span<const Vector> cols, Index capacity = -1,
                                  double rank_tol = kDefaultRankTol);

  void append_column(const Vector& col);
  void remove_leftmost();
  void remove_rightmost();
  void replace_rightmost(const Vector& col);
  void clear();

  /// Numerical rank: the number of leading pivots of the column-pivoted R
  /// with |R~_ii| > rank_tol * |R~_11|. Zero iff Y is exactly zero.
  [[nodiscard]] Index numerical_rank() const noexcept { return rank_; }

  /// Minimizer of ||Y w - rhs|| with least ||w||. Full-rank factorizations
  /// use back substitution; rank-deficient ones a complete orthogonal
  /// decomposition of R.
  [[nodiscard]] Vector min_norm_solve(const Vector& rhs) const;

  [[nodiscard]] Index rows() const noexcept { return n_; }
  [[nodiscard]] Index cols() const noexcept { return m_; }
  [[nodiscard]] Index capacity() const noexcept { return cap_; }
  [[nodiscard]] double rank_tol() const noexcept { return rank_tol_; }
  [[nodiscard]] bool empty() const noexcept { return m_ == 0; }

  [[nodiscard]] auto Q() const { return q_.leftCols(r_); }
  [[nodiscard]] auto R() const { return r_mat_.topLeftCorner(r_, m_); }

  /// Q * R, i.e. the matrix currently represented.
  [[nodiscard]] Matrix reconstruct() const;

  /// ||Q^T Q - I||_F.
  [[nodiscard]] double orthogonality_error() const;

 private:
  void refresh_rank();
  void after_update();
  void reorthogonalize();
  [[nodiscard]] Vector orthogonal_complement_direction() const;

  Index n_;
  Index cap_;
  double rank_tol_;
  Index m_ = 0;
  Index r_ = 0;
  Index rank_ = 0;
  int updates_since_check_ = 0;
  Matrix q_;      // n x min(n, cap), first r_ columns live
  Matrix r_mat_;  // min(n, cap) x cap, top-left r_ x m_ live
};

}  // namespace dfsane
