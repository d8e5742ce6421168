#pragma once

#include "dfsane/problem.hpp"

#include <array>
#include <optional>

namespace dfsane {

/// Finite-difference Bratu system  -Lap_h u + theta e^u = phi  on the unit
/// square or cube with zero boundary values.
///
/// phi is built from the manufactured solution
///   2D: 10 u1 u2 (1-u1)(1-u2) e^{u1^4.5}
///   3D: 10 u1 u2 u3 (1-u1)(1-u2)(1-u3) e^{u1^4.5}
/// sampled on the grid and pushed through the discrete operator, so the
/// sampled field is an exact root. Unknowns are the interior nodes in
/// lexicographic order, first axis fastest. Equations are not scaled by h^2.
class BratuProblem final : public ResidualProblem {
 public:
  enum class Kind { two_d, three_d };

  BratuProblem(Kind kind, int n_p, double theta);

  [[nodiscard]] Index dim() const override { return n_; }
  void evaluate(const Vector& u, Vector& out) const override;
  [[nodiscard]] std::optional<Vector> known_solution() const override { return solution_; }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] int n_p() const noexcept { return n_p_; }
  [[nodiscard]] double theta() const noexcept { return theta_; }
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] const Vector& rhs() const noexcept { return phi_; }

  /// Interior node (1-based grid indices, unused axes 0) <-> unknown index.
  [[nodiscard]] Index index_of(const std::array<int, 3>& node) const;
  [[nodiscard]] std::array<int, 3> node_of(Index idx) const;

  [[nodiscard]] static double manufactured(double u1, double u2);
  [[nodiscard]] static double manufactured(double u1, double u2, double u3);

 private:
  // -Lap_h u + theta e^u, no right-hand side.
  void apply_operator(const Vector& u, Vector& out) const;

  Kind kind_;
  int n_p_;
  int m_;  // interior nodes per axis
  double theta_;
  double h_;
  Index n_;
  Vector phi_;
  Vector solution_;
};

[[nodiscard]] BratuProblem bratu2d(int n_p, double theta);
[[nodiscard]] BratuProblem bratu3d(int n_p, double theta);

/// F(x) = A x - b with dense A.
class LinearProblem final : public ResidualProblem {
 public:
  LinearProblem(Matrix A, Vector b);

  [[nodiscard]] Index dim() const override { return b_.size(); }
  void evaluate(const Vector& x, Vector& out) const override;
  [[nodiscard]] std::optional<Vector> known_solution() const override { return solution_; }

  [[nodiscard]] const Matrix& A() const noexcept { return a_; }
  [[nodiscard]] const Vector& b() const noexcept { return b_; }

 private:
  Matrix a_;
  Vector b_;
  std::optional<Vector> solution_;
};

[[nodiscard]] LinearProblem linear_problem(Matrix A, Vector b);

/// diag(1, ..., n) x = (1, ..., n); root is the all-ones vector.
[[nodiscard]] LinearProblem diagonal_linear_problem(Index n);

[[nodiscard]] inline std::optional<Vector> exact_solution(const ResidualProblem& problem) {
  return problem.known_solution();
}

}  // namespace dfsane
