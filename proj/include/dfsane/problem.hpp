#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace dfsane {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised by a residual map when it cannot produce a finite value at x.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a solve has spent its residual-evaluation budget.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("residual evaluation budget exhausted") {}
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A square nonlinear system F: R^n -> R^n.
///
/// evaluate() must be deterministic and free of side effects; independent
/// solves may call it concurrently on the same object.
class ResidualProblem {
 public:
  virtual ~ResidualProblem() = default;

  [[nodiscard]] virtual Index dim() const = 0;

  /// Writes F(x) into out (resized by the callee). Throws DomainError when
  /// F(x) is not representable.
  virtual void evaluate(const Vector& x, Vector& out) const = 0;

  [[nodiscard]] virtual std::optional<Vector> known_solution() const { return std::nullopt; }
};

/// Adapts a callable into a ResidualProblem. Mostly for tests and small systems.
class FunctionProblem final : public ResidualProblem {
 public:
  using Fn = std::function<void(const Vector&, Vector&)>;

  FunctionProblem(Index n, Fn fn, std::optional<Vector> solution = std::nullopt)
      : n_(n), fn_(std::move(fn)), solution_(std::move(solution)) {
    if (n_ <= 0) throw ConfigError("FunctionProblem: dimension must be positive");
  }

  [[nodiscard]] Index dim() const override { return n_; }
  void evaluate(const Vector& x, Vector& out) const override { fn_(x, out); }
  [[nodiscard]] std::optional<Vector> known_solution() const override { return solution_; }

 private:
  Index n_;
  Fn fn_;
  std::optional<Vector> solution_;
};

/// Counting front end to a ResidualProblem. Every residual evaluation made by a
/// solve goes through one of these, so count() is the solve's feval total.
class Evaluator {
 public:
  explicit Evaluator(const ResidualProblem& problem,
                     std::size_t budget = std::numeric_limits<std::size_t>::max())
      : problem_(&problem), budget_(budget) {}

  /// Evaluates F(x). Throws BudgetExhausted before the call if the budget is
  /// spent, and DomainError if the problem signals one or returns a
  /// non-finite vector.
  Vector operator()(const Vector& x) {
    if (count_ >= budget_) throw BudgetExhausted();
    ++count_;
    Vector out;
    problem_->evaluate(x, out);
    if (out.size() != problem_->dim()) throw DomainError("residual has wrong dimension");
    if (!out.allFinite()) throw DomainError("residual is not finite");
    return out;
  }

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] std::size_t budget() const noexcept { return budget_; }
  [[nodiscard]] Index dim() const { return problem_->dim(); }
  [[nodiscard]] const ResidualProblem& problem() const noexcept { return *problem_; }

 private:
  const ResidualProblem* problem_;
  std::size_t budget_;
  std::size_t count_ = 0;
};

}  // namespace dfsane
