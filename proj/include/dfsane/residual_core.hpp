#pragma once

#include "dfsane/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace dfsane {

enum class SigmaStrategy { conservative, spectral };
enum class AccelKind { none, secant, anderson };

struct AccelMode {
  AccelKind kind = AccelKind::secant;
  double beta = 0.0;  // anderson only
};

struct RandomSafeguard {
  bool enabled = false;
  double alpha_small = 1e-3;
  std::uint64_t seed = 0;
};

/// Every tunable of the residual method, its step-3 acceleration and the
/// stopping test. Use the factory functions to get consistent defaults.
struct SolverConfig {
  double gamma = 1e-4;
  double sigma_min = 1.4901161193847656e-08;
  double sigma_max = 1.0;
  double tau_min = 0.1;
  double tau_max = 0.5;
  int memory_M = 10;
  double eps = 1e-6;  // absolute tolerance on ||F||_2
  double h_init = 1.0;
  double h_small = 0.1;
  double h_large = 0.1;
  int depth_p = 5;
  std::size_t max_iters = 100000;
  std::size_t max_fevals = 1000000;
  SigmaStrategy sigma_strategy = SigmaStrategy::conservative;
  AccelMode accel{};
  RandomSafeguard random_safeguard{};
  std::optional<double> accept_guard_c;
  double line_search_floor = 1e-30;
  double anderson_divergence_factor = 1e12;

  /// Accelerated method: conservative sigma in [sqrt(u), 1].
  static SolverConfig accelerated();
  /// Plain DF-SANE: spectral sigma in [sqrt(u), 1/sqrt(u)], no step-3 work.
  static SolverConfig dfsane();
  /// Anderson mixing with fixed damping beta.
  static SolverConfig anderson(double beta);

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

enum class SolveStatus { converged, max_iterations, max_fevals, line_search_failure, evaluation_error };

[[nodiscard]] std::string_view to_string(SolveStatus s) noexcept;
[[nodiscard]] std::string_view to_string(SigmaStrategy s) noexcept;
[[nodiscard]] std::string_view to_string(AccelKind k) noexcept;

enum class Branch { trial, accelerated };
[[nodiscard]] std::string_view to_string(Branch b) noexcept;

struct TraceEntry {
  std::size_t k = 0;
  double residual_norm = 0.0;  // ||F(x^k)||
  double merit = 0.0;          // f(x^k)
  double alpha = 0.0;
  int direction_sign = -1;     // -1: d = -sigma v, +1: d = +sigma v
  Branch branch = Branch::trial;
  double sigma = 0.0;
  double fbar = 0.0;
  double eta = 0.0;
  std::size_t cumulative_fevals = 0;
  double elapsed_seconds = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::evaluation_error;
  std::size_t iterations = 0;
  std::size_t fevals = 0;
  double final_residual_norm = 0.0;
  double elapsed_seconds = 0.0;
  Vector solution;
  std::vector<TraceEntry> trace;
};

/// f(x) = ||F(x)||^2 / 2.
[[nodiscard]] double merit(const Vector& F_val);

/// 2^-k min{||F0||/2, sqrt(||F0||)}. Underflows to zero for very large k.
[[nodiscard]] double eta_schedule(std::size_t k, double F0_norm);

/// Sliding window over the last M merit values.
class NonmonotoneMemory {
 public:
  explicit NonmonotoneMemory(int capacity);

  void push(double merit_value);
  /// Largest stored value. Throws std::logic_error when empty.
  [[nodiscard]] double max() const;
  [[nodiscard]] std::size_t size() const noexcept { return ring_.size(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] bool empty() const noexcept { return ring_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<double> ring_;
};

/// Barzilai-Borwein scaling ||s||^2 / y's with |sigma| clamped into
/// [sigma_min, sigma_max]; y's == 0 falls back to 1.
[[nodiscard]] double spectral_sigma(const Vector& s_prev, const Vector& y_prev, double sigma_min,
                                    double sigma_max);

/// Small scaling tied to the last step length. k = 0 gives 1; otherwise
/// h_init ||x_cur - x_prev|| / F_norm if it lies in
/// [max{1, ||x_cur||} sigma_min, sigma_max], else h_init ||x_cur|| / F_norm
/// projected onto that interval.
[[nodiscard]] double conservative_sigma(std::size_t k, const Vector& x_prev, const Vector& x_cur,
                                        double F_norm, double h_init, double sigma_min,
                                        double sigma_max);

/// Safeguarded minimizer of the quadratic through f(x), f(x + alpha d) and the
/// slope obtained by taking J = I. Always inside [tau_min alpha, tau_max alpha].
[[nodiscard]] double reduce_alpha(double alpha, double f_x, double f_trial, double tau_min,
                                  double tau_max);

struct LineSearchStep {
  double alpha = 0.0;
  Vector d;        // -sigma v or +sigma v; x_trial = x + alpha d
  Vector x_trial;
  Vector F_trial;
  double f_trial = 0.0;
  int direction_sign = -1;
  std::size_t evals = 0;
};

/// Double-direction nonmonotone backtracking. Tries d = -sigma v at alpha_+,
/// then d = +sigma v at alpha_-, shrinking both with reduce_alpha until
///   f(x + alpha d) <= fbar + eta - gamma alpha^2 f(x).
/// Trial points where F cannot be evaluated count as rejections. Returns
/// nullopt once both step sizes drop below cfg.line_search_floor.
[[nodiscard]] std::optional<LineSearchStep> line_search(Evaluator& eval, const Vector& x,
                                                        const Vector& F_x, const Vector& v,
                                                        double sigma, double fbar, double eta,
                                                        const SolverConfig& cfg);

/// Uniform point on the sphere of radius `radius` in R^n.
[[nodiscard]] Vector random_direction(std::mt19937_64& rng, Index n, double radius);

/// Result of the step-3 acceleration. merit(F_next) <= merit(F_trial).
struct AccelDecision {
  enum class MemoryAction { substituted_rightmost, kept_trial_pair, restarted };

  Vector x_next;
  Vector F_next;
  Branch branch = Branch::trial;
  std::size_t extra_evals = 0;
  MemoryAction memory_action = MemoryAction::kept_trial_pair;
};

/// Step 3 of the residual method: given the line-search point, produce a point
/// at least as good.
class StepAccelerator {
 public:
  virtual ~StepAccelerator() = default;
  virtual AccelDecision accelerate(Evaluator& eval, const Vector& x_k, const Vector& F_k,
                                   const Vector& x_trial, const Vector& F_trial) = 0;
};

/// Everything known about one completed outer iteration. Handed to observers
/// so tests can re-check acceptance conditions without re-running the solve.
struct IterationView {
  std::size_t k;
  const Vector& x;
  const Vector& F;
  const Vector& v;
  double sigma;
  double fbar;
  double eta;
  const LineSearchStep& step;
  const AccelDecision& decision;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// Sequential residual method with nonmonotone double-direction line search.
/// v^k = F(x^k) unless the random safeguard replaces it. accelerator may be
/// null, in which case x^{k+1} is the line-search point.
[[nodiscard]] SolveReport solve_residual(const ResidualProblem& problem, const Vector& x0,
                                         const SolverConfig& cfg, StepAccelerator* accelerator,
                                         const IterationObserver& observer = {});

}  // namespace dfsane
