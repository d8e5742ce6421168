#pragma once

#include "dfsane/lowrank_qr.hpp"
#include "dfsane/residual_core.hpp"

#include <algorithm>
#include <deque>

namespace dfsane {

/// The (S, Y) column pairs used by the secant acceleration, at most depth_p of
/// them, plus the live QR factorization of Y, the largest rank seen so far and
/// the cyclic probe coordinate.
class SecantMemory {
 public:
  SecantMemory(Index n, int depth_p, double rank_tol = UpdatableQR::kDefaultRankTol);

  [[nodiscard]] Index dim() const noexcept { return n_; }
  [[nodiscard]] int depth() const noexcept { return depth_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(s_.size()); }
  [[nodiscard]] bool full() const noexcept { return size() == depth_; }
  [[nodiscard]] bool empty() const noexcept { return s_.empty(); }

  void push_pair(const Vector& s, const Vector& y);
  void pop_front();
  void pop_back();
  void replace_back(const Vector& s, const Vector& y);
  /// Drops every pair. r_max and the probe coordinate survive.
  void clear();

  [[nodiscard]] Index rank() const noexcept { return qr_.numerical_rank(); }
  [[nodiscard]] Index r_max() const noexcept { return r_max_; }
  void note_rank() noexcept { r_max_ = std::max(r_max_, rank()); }

  /// Current probe coordinate, 1-based, in [1, n].
  [[nodiscard]] Index probe_index() const noexcept { return ell_ + 1; }
  /// Returns the 0-based coordinate to probe and advances cyclically.
  Index take_probe_coordinate() noexcept;

  [[nodiscard]] const std::deque<Vector>& S() const noexcept { return s_; }
  [[nodiscard]] const std::deque<Vector>& Y() const noexcept { return y_; }
  [[nodiscard]] const UpdatableQR& qr() const noexcept { return qr_; }

  /// S * w and Y * w.
  [[nodiscard]] Vector combine_S(const Vector& w) const;
  [[nodiscard]] Vector combine_Y(const Vector& w) const;

  /// ||Y - QR||_F / max(1, ||Y||_F).
  [[nodiscard]] double factorization_residual() const;

 private:
  void check_consistency() const;

  Index n_;
  int depth_;
  std::deque<Vector> s_;
  std::deque<Vector> y_;
  UpdatableQR qr_;
  Index r_max_ = 0;
  Index ell_ = 0;
};

/// Empties the pair store (r_max and the probe coordinate are kept).
void reset(SecantMemory& mem);

/// Step 3 by sequential-secant acceleration with rank-drop probes and
/// zero-rank restarts.
///
/// The trial pair (x_trial - x_k, F_trial - F_k) is pushed (dropping the
/// oldest pair at capacity). If rank(Y) fell below the largest rank seen, one
/// probe pair from x_k + h_small e_l joins for the solve and is removed
/// afterwards. The candidate
///   x_accel = x_k - S w,   w = argmin-norm ||Y w - F_k||
/// replaces the trial point, and the rightmost pair, when x_accel != x_k,
/// ||x_accel|| <= 10 max{1, ||x_k||} and ||F(x_accel)|| < ||F(x_trial)||.
/// When Y has rank zero the store is rebuilt from p-1 probes at
/// x_k + h_large e_l (differenced against the trial point) and the trial pair.
[[nodiscard]] AccelDecision accelerate(Evaluator& eval, const Vector& x_k, const Vector& F_k,
                                       const Vector& x_trial, const Vector& F_trial,
                                       SecantMemory& mem, const SolverConfig& cfg);

/// One Anderson-mixing update from the stored fixed-point history:
///   x_bar = x_k - S w,  F_bar = F_k - Y w,  returns x_bar - beta F_bar.
/// Evaluates nothing.
[[nodiscard]] Vector anderson_step(const Vector& x_k, const Vector& F_k, const SecantMemory& mem,
                                   double beta);

class SecantAccelerator final : public StepAccelerator {
 public:
  SecantAccelerator(Index n, const SolverConfig& cfg);

  AccelDecision accelerate(Evaluator& eval, const Vector& x_k, const Vector& F_k,
                           const Vector& x_trial, const Vector& F_trial) override;

  [[nodiscard]] const SecantMemory& memory() const noexcept { return mem_; }

 private:
  SolverConfig cfg_;
  SecantMemory mem_;
};

/// Pure Anderson-mixing iteration (no line search). Stops as max_fevals when
/// ||F|| exceeds cfg.anderson_divergence_factor * ||F(x0)||.
[[nodiscard]] SolveReport solve_anderson(const ResidualProblem& problem, const Vector& x0,
                                         const SolverConfig& cfg);

}  // namespace dfsane
