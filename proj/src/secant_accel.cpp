#include "dfsane/secant_accel.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfsane {

SecantMemory::SecantMemory(Index n, int depth_p, double rank_tol)
    : n_(n), depth_(depth_p), qr_(n, depth_p, rank_tol) {
  if (depth_p < 1) throw ConfigError("SecantMemory: depth must be positive");
}

void SecantMemory::push_pair(const Vector& s, const Vector& y) {
  if (full()) throw std::length_error("SecantMemory: push_pair on full memory");
  if (s.size() != n_ || y.size() != n_) throw std::invalid_argument("SecantMemory: pair has wrong dimension");
  s_.push_back(s);
  y_.push_back(y);
  qr_.append_column(y);
  check_consistency();
}

void SecantMemory::pop_front() {
  if (empty()) throw std::logic_error("SecantMemory: pop_front on empty memory");
  s_.pop_front();
  y_.pop_front();
  qr_.remove_leftmost();
  check_consistency();
}

void SecantMemory::pop_back() {
  if (empty()) throw std::logic_error("SecantMemory: pop_back on empty memory");
  s_.pop_back();
  y_.pop_back();
  qr_.remove_rightmost();
  check_consistency();
}

void SecantMemory::replace_back(const Vector& s, const Vector& y) {
  if (empty()) throw std::logic_error("SecantMemory: replace_back on empty memory");
  s_.back() = s;
  y_.back() = y;
  qr_.replace_rightmost(y);
  check_consistency();
}

void SecantMemory::clear() {
  s_.clear();
  y_.clear();
  qr_.clear();
}

Index SecantMemory::take_probe_coordinate() noexcept {
  const Index coord = ell_;
  ell_ = (ell_ + 1) % n_;
  return coord;
}

Vector SecantMemory::combine_S(const Vector& w) const {
  Vector out = Vector::Zero(n_);
  for (std::size_t j = 0; j < s_.size(); ++j) out += w(static_cast<Index>(j)) * s_[j];
  return out;
}

Vector SecantMemory::combine_Y(const Vector& w) const {
  Vector out = Vector::Zero(n_);
  for (std::size_t j = 0; j < y_.size(); ++j) out += w(static_cast<Index>(j)) * y_[j];
  return out;
}

double SecantMemory::factorization_residual() const {
  if (empty()) return 0.0;
  Matrix y(n_, size());
  for (int j = 0; j < size(); ++j) y.col(j) = y_[static_cast<std::size_t>(j)];
  return (y - qr_.reconstruct()).norm() / std::max(1.0, y.norm());
}

void SecantMemory::check_consistency() const {
#ifndef NDEBUG
  assert(s_.size() == y_.size());
  assert(qr_.cols() == size());
  assert(factorization_residual() <= 1e-10);
#endif
}

void reset(SecantMemory& mem) { mem.clear(); }

namespace {

Vector unit_step(const Vector& base, Index coord, double h) {
  Vector x = base;
  x(coord) += h;
  return x;
}

}  // namespace

AccelDecision accelerate(Evaluator& eval, const Vector& x_k, const Vector& F_k,
                         const Vector& x_trial, const Vector& F_trial, SecantMemory& mem,
                         const SolverConfig& cfg) {
  const std::size_t evals_before = eval.count();

  AccelDecision decision;
  decision.x_next = x_trial;
  decision.F_next = F_trial;
  decision.branch = Branch::trial;
  decision.memory_action = AccelDecision::MemoryAction::kept_trial_pair;

  const double x_k_norm = x_k.norm();
  const double F_k_norm = F_k.norm();

  auto solve_candidate = [&]() -> Vector {
    const Vector omega = mem.qr().min_norm_solve(F_k);
    return x_k - mem.combine_S(omega);
  };

  // Accepts x_accel in place of the current trial point when it passes the guards.
  auto guard_and_substitute = [&](const Vector& x_accel) {
    if ((x_accel.array() == x_k.array()).all()) return;
    if (!(x_accel.norm() <= 10.0 * std::max(1.0, x_k_norm))) return;
    if (cfg.accept_guard_c && !((x_accel - x_k).norm() <= *cfg.accept_guard_c * F_k_norm)) return;
    Vector F_accel;
    try {
      F_accel = eval(x_accel);
    } catch (const DomainError&) {
      return;
    }
    if (!(F_accel.norm() < decision.F_next.norm())) return;
    mem.replace_back(x_accel - x_k, F_accel - F_k);
    mem.note_rank();
    decision.x_next = x_accel;
    decision.F_next = std::move(F_accel);
    decision.branch = Branch::accelerated;
    if (decision.memory_action != AccelDecision::MemoryAction::restarted) {
      decision.memory_action = AccelDecision::MemoryAction::substituted_rightmost;
    }
  };

  if (mem.full()) mem.pop_front();
  mem.push_pair(x_trial - x_k, F_trial - F_k);
  mem.note_rank();

  bool probe_added = false;
  if (mem.rank() < mem.r_max()) {
    if (mem.full()) mem.pop_front();
    const Vector x_extra = unit_step(x_k, mem.take_probe_coordinate(), cfg.h_small);
    const Vector F_extra = eval(x_extra);
    mem.push_pair(x_extra - x_k, F_extra - F_k);
    mem.note_rank();
    probe_added = true;
  }

  if (mem.rank() != 0) {
    const Vector x_accel = solve_candidate();
    if (probe_added) mem.pop_back();
    guard_and_substitute(x_accel);
  }

  if (mem.rank() == 0) {
    // Restart from probes around x_k, differenced against the trial point.
    const Vector x_t = decision.x_next;
    const Vector F_t = decision.F_next;
    mem.clear();
    decision.memory_action = AccelDecision::MemoryAction::restarted;
    for (int i = 0; i < mem.depth() - 1; ++i) {
      const Vector x_extra = unit_step(x_k, mem.take_probe_coordinate(), cfg.h_large);
      const Vector F_extra = eval(x_extra);
      mem.push_pair(x_extra - x_t, F_extra - F_t);
      mem.note_rank();
    }
    mem.push_pair(x_t - x_k, F_t - F_k);
    mem.note_rank();
    if (mem.rank() != 0) guard_and_substitute(solve_candidate());
  }

  decision.extra_evals = eval.count() - evals_before;
  return decision;
}

Vector anderson_step(const Vector& x_k, const Vector& F_k, const SecantMemory& mem, double beta) {
  if (mem.empty()) return x_k - beta * F_k;
  const Vector omega = mem.qr().min_norm_solve(F_k);
  const Vector x_bar = x_k - mem.combine_S(omega);
  const Vector F_bar = F_k - mem.combine_Y(omega);
  return x_bar - beta * F_bar;
}

SecantAccelerator::SecantAccelerator(Index n, const SolverConfig& cfg)
    : cfg_(cfg), mem_(n, cfg.depth_p) {}

AccelDecision SecantAccelerator::accelerate(Evaluator& eval, const Vector& x_k, const Vector& F_k,
                                            const Vector& x_trial, const Vector& F_trial) {
  return dfsane::accelerate(eval, x_k, F_k, x_trial, F_trial, mem_, cfg_);
}

SolveReport solve_anderson(const ResidualProblem& problem, const Vector& x0,
                           const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  if (cfg.accel.kind != AccelKind::anderson) throw ConfigError("solve_anderson needs accel kind anderson");
  if (x0.size() != problem.dim()) throw ConfigError("initial point has wrong dimension");
  if (!x0.allFinite()) throw ConfigError("initial point is not finite");

  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  Evaluator eval(problem, cfg.max_fevals);
  SolveReport report;
  SecantMemory mem(problem.dim(), cfg.depth_p);

  Vector x = x0;
  Vector F;
  try {
    F = eval(x);
  } catch (const DomainError&) {
    report.status = SolveStatus::evaluation_error;
    report.fevals = eval.count();
    report.final_residual_norm = std::numeric_limits<double>::infinity();
    report.solution = x;
    report.elapsed_seconds = elapsed();
    return report;
  }
  const double F0_norm = F.norm();

  std::size_t k = 0;
  for (;;) {
    const double F_norm = F.norm();
    if (F_norm <= cfg.eps) {
      report.status = SolveStatus::converged;
      break;
    }
    if (k >= cfg.max_iters) {
      report.status = SolveStatus::max_iterations;
      break;
    }
    if (F_norm > cfg.anderson_divergence_factor * F0_norm) {
      report.status = SolveStatus::max_fevals;
      break;
    }

    const Branch branch = mem.empty() ? Branch::trial : Branch::accelerated;
    Vector x_new = anderson_step(x, F, mem, cfg.accel.beta);
    if (!x_new.allFinite()) {
      report.status = SolveStatus::max_fevals;
      break;
    }
    Vector F_new;
    try {
      F_new = eval(x_new);
    } catch (const BudgetExhausted&) {
      report.status = SolveStatus::max_fevals;
      break;
    } catch (const DomainError&) {
      report.status = SolveStatus::evaluation_error;
      break;
    }

    if (mem.full()) mem.pop_front();
    mem.push_pair(x_new - x, F_new - F);

    TraceEntry entry;
    entry.k = k;
    entry.residual_norm = F_norm;
    entry.merit = merit(F);
    entry.alpha = 1.0;
    entry.direction_sign = -1;
    entry.branch = branch;
    entry.sigma = cfg.accel.beta;
    entry.cumulative_fevals = eval.count();
    entry.elapsed_seconds = elapsed();
    report.trace.push_back(entry);

    x = std::move(x_new);
    F = std::move(F_new);
    ++k;
  }

  report.iterations = k;
  report.fevals = eval.count();
  report.final_residual_norm = F.norm();
  report.solution = std::move(x);
  report.elapsed_seconds = elapsed();
  return report;
}

}  // namespace dfsane
