#include "dfsane/problem_suite.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

namespace dfsane {

BratuProblem::BratuProblem(Kind kind, int n_p, double theta)
    : kind_(kind), n_p_(n_p), m_(n_p - 2), theta_(theta) {
  if (n_p < 3) throw ConfigError("Bratu grid needs n_p >= 3, got " + std::to_string(n_p));
  if (!std::isfinite(theta)) throw ConfigError("Bratu theta must be finite");
  h_ = 1.0 / (n_p - 1);
  const Index m = m_;
  n_ = kind_ == Kind::two_d ? m * m : m * m * m;

  solution_.resize(n_);
  for (Index idx = 0; idx < n_; ++idx) {
    const auto node = node_of(idx);
    const double u1 = node[0] * h_;
    const double u2 = node[1] * h_;
    solution_(idx) = kind_ == Kind::two_d ? manufactured(u1, u2) : manufactured(u1, u2, node[2] * h_);
  }
  apply_operator(solution_, phi_);
}

double BratuProblem::manufactured(double u1, double u2) {
  return 10.0 * u1 * u2 * (1.0 - u1) * (1.0 - u2) * std::exp(std::pow(u1, 4.5));
}

double BratuProblem::manufactured(double u1, double u2, double u3) {
  return 10.0 * u1 * u2 * u3 * (1.0 - u1) * (1.0 - u2) * (1.0 - u3) * std::exp(std::pow(u1, 4.5));
}

Index BratuProblem::index_of(const std::array<int, 3>& node) const {
  const Index m = m_;
  Index idx = (node[0] - 1) + m * (node[1] - 1);
  if (kind_ == Kind::three_d) idx += m * m * (node[2] - 1);
  return idx;
}

std::array<int, 3> BratuProblem::node_of(Index idx) const {
  const Index m = m_;
  std::array<int, 3> node{};
  node[0] = static_cast<int>(idx % m) + 1;
  node[1] = static_cast<int>((idx / m) % m) + 1;
  node[2] = kind_ == Kind::three_d ? static_cast<int>(idx / (m * m)) + 1 : 0;
  return node;
}

void BratuProblem::apply_operator(const Vector& u, Vector& out) const {
  out.resize(n_);
  const double inv_h2 = 1.0 / (h_ * h_);
  const Index m = m_;
  const Index plane = m * m;

  auto reaction = [&](double ui) {
    if (theta_ == 0.0) return 0.0;
    const double r = theta_ * std::exp(ui);
    if (!std::isfinite(r)) throw DomainError("Bratu: theta * exp(u) overflows");
    return r;
  };

  if (kind_ == Kind::two_d) {
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < m; ++i) {
        const Index idx = i + m * j;
        const double c = u(idx);
        double nb = 0.0;
        if (i > 0) nb += u(idx - 1);
        if (i + 1 < m) nb += u(idx + 1);
        if (j > 0) nb += u(idx - m);
        if (j + 1 < m) nb += u(idx + m);
        out(idx) = (4.0 * c - nb) * inv_h2 + reaction(c);
      }
    }
    return;
  }

  for (Index k = 0; k < m; ++k) {
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < m; ++i) {
        const Index idx = i + m * j + plane * k;
        const double c = u(idx);
        double nb = 0.0;
        if (i > 0) nb += u(idx - 1);
        if (i + 1 < m) nb += u(idx + 1);
        if (j > 0) nb += u(idx - m);
        if (j + 1 < m) nb += u(idx + m);
        if (k > 0) nb += u(idx - plane);
        if (k + 1 < m) nb += u(idx + plane);
        out(idx) = (6.0 * c - nb) * inv_h2 + reaction(c);
      }
    }
  }
}

void BratuProblem::evaluate(const Vector& u, Vector& out) const {
  if (u.size() != n_) throw DomainError("Bratu: input has wrong dimension");
  apply_operator(u, out);
  out -= phi_;
}

BratuProblem bratu2d(int n_p, double theta) { return {BratuProblem::Kind::two_d, n_p, theta}; }
BratuProblem bratu3d(int n_p, double theta) { return {BratuProblem::Kind::three_d, n_p, theta}; }

LinearProblem::LinearProblem(Matrix A, Vector b) : a_(std::move(A)), b_(std::move(b)) {
  if (a_.rows() != a_.cols()) throw ConfigError("linear problem: matrix must be square");
  if (a_.rows() != b_.size()) throw ConfigError("linear problem: right-hand side has wrong dimension");
  if (b_.size() == 0) throw ConfigError("linear problem: empty system");
  const Eigen::FullPivLU<Matrix> lu(a_);
  if (lu.isInvertible()) solution_ = lu.solve(b_);
}

void LinearProblem::evaluate(const Vector& x, Vector& out) const {
  if (x.size() != b_.size()) throw DomainError("linear problem: input has wrong dimension");
  out.noalias() = a_ * x;
  out -= b_;
}

LinearProblem linear_problem(Matrix A, Vector b) { return {std::move(A), std::move(b)}; }

LinearProblem diagonal_linear_problem(Index n) {
  if (n <= 0) throw ConfigError("linear problem: n must be positive");
  const Vector d = Vector::LinSpaced(n, 1.0, static_cast<double>(n));
  return {Matrix(d.asDiagonal()), d};
}

}  // namespace dfsane
