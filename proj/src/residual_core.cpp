#include "dfsane/residual_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dfsane {

namespace {

const double kSqrtEps = std::sqrt(std::numeric_limits<double>::epsilon());

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct TrialPoint {
  Vector x;
  Vector F;
  double f;
};

// A residual that cannot be evaluated simply fails the acceptance test.
TrialPoint try_point(Evaluator& eval, Vector x) {
  try {
    Vector F = eval(x);
    const double f = merit(F);
    return {std::move(x), std::move(F), f};
  } catch (const DomainError&) {
    return {std::move(x), Vector(), std::numeric_limits<double>::infinity()};
  }
}

}  // namespace

SolverConfig SolverConfig::accelerated() {
  SolverConfig cfg;
  cfg.sigma_strategy = SigmaStrategy::conservative;
  cfg.sigma_min = kSqrtEps;
  cfg.sigma_max = 1.0;
  cfg.accel = {AccelKind::secant, 0.0};
  return cfg;
}

SolverConfig SolverConfig::dfsane() {
  SolverConfig cfg;
  cfg.sigma_strategy = SigmaStrategy::spectral;
  cfg.sigma_min = kSqrtEps;
  cfg.sigma_max = 1.0 / kSqrtEps;
  cfg.accel = {AccelKind::none, 0.0};
  return cfg;
}

SolverConfig SolverConfig::anderson(double beta) {
  SolverConfig cfg;
  cfg.accel = {AccelKind::anderson, beta};
  return cfg;
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid solver configuration: ") + what);
  };
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
  require(sigma_min > 0.0 && sigma_min < sigma_max && std::isfinite(sigma_max),
          "need 0 < sigma_min < sigma_max < inf");
  require(tau_min > 0.0 && tau_min < tau_max && tau_max < 1.0, "need 0 < tau_min < tau_max < 1");
  require(memory_M >= 1, "memory_M must be positive");
  require(eps > 0.0, "eps must be positive");
  require(h_init > 0.0 && h_small > 0.0 && h_large > 0.0, "h_init, h_small, h_large must be positive");
  require(depth_p >= 1, "depth_p must be positive");
  require(max_iters >= 1 && max_fevals >= 1, "budgets must be positive");
  require(line_search_floor > 0.0, "line_search_floor must be positive");
  if (accel.kind == AccelKind::anderson) {
    require(accel.beta > 0.0 && std::isfinite(accel.beta), "anderson beta must be positive");
  }
  if (random_safeguard.enabled) {
    require(random_safeguard.alpha_small > 0.0, "alpha_small must be positive");
  }
  if (accept_guard_c) require(*accept_guard_c > 0.0, "accept_guard_c must be positive");
}

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::max_fevals: return "max_fevals";
    case SolveStatus::line_search_failure: return "line_search_failure";
    case SolveStatus::evaluation_error: return "evaluation_error";
  }
  return "unknown";
}

std::string_view to_string(SigmaStrategy s) noexcept {
  return s == SigmaStrategy::conservative ? "conservative" : "spectral";
}

std::string_view to_string(AccelKind k) noexcept {
  switch (k) {
    case AccelKind::none: return "none";
    case AccelKind::secant: return "secant";
    case AccelKind::anderson: return "anderson";
  }
  return "unknown";
}

std::string_view to_string(Branch b) noexcept {
  return b == Branch::trial ? "trial" : "accelerated";
}

double merit(const Vector& F_val) { return 0.5 * F_val.squaredNorm(); }

double eta_schedule(std::size_t k, double F0_norm) {
  const double base = std::min(0.5 * F0_norm, std::sqrt(F0_norm));
  const int shift = k > 2000 ? 2000 : static_cast<int>(k);
  return std::ldexp(base, -shift);
}

NonmonotoneMemory::NonmonotoneMemory(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {
  if (capacity < 1) throw ConfigError("NonmonotoneMemory: capacity must be positive");
}

void NonmonotoneMemory::push(double merit_value) {
  if (ring_.size() == capacity_) ring_.pop_front();
  ring_.push_back(merit_value);
}

double NonmonotoneMemory::max() const {
  if (ring_.empty()) throw std::logic_error("NonmonotoneMemory: max of empty memory");
  return *std::max_element(ring_.begin(), ring_.end());
}

double spectral_sigma(const Vector& s_prev, const Vector& y_prev, double sigma_min,
                      double sigma_max) {
  const double sty = s_prev.dot(y_prev);
  const double raw = sty != 0.0 ? s_prev.squaredNorm() / sty : 1.0;
  const double mag = std::clamp(std::abs(raw), sigma_min, sigma_max);
  return std::copysign(mag, raw);
}

double conservative_sigma(std::size_t k, const Vector& x_prev, const Vector& x_cur, double F_norm,
                          double h_init, double sigma_min, double sigma_max) {
  if (k == 0) return 1.0;
  const double x_norm = x_cur.norm();
  const double lo = std::max(1.0, x_norm) * sigma_min;
  const double hi = sigma_max;
  const double step_based = h_init * (x_cur - x_prev).norm() / F_norm;
  if (step_based >= lo && step_based <= hi) return step_based;
  const double point_based = h_init * x_norm / F_norm;
  return std::min(std::max(point_based, lo), hi);
}

double reduce_alpha(double alpha, double f_x, double f_trial, double tau_min, double tau_max) {
  const double quotient = alpha * alpha * f_x / (f_trial + (2.0 * alpha - 1.0) * f_x);
  if (!std::isfinite(quotient)) return tau_max * alpha;
  return std::max(tau_min * alpha, std::min(quotient, tau_max * alpha));
}

std::optional<LineSearchStep> line_search(Evaluator& eval, const Vector& x, const Vector& F_x,
                                          const Vector& v, double sigma, double fbar, double eta,
                                          const SolverConfig& cfg) {
  const std::size_t evals_before = eval.count();
  const double f_x = merit(F_x);
  const Vector sv = sigma * v;
  double alpha_plus = 1.0;
  double alpha_minus = 1.0;

  auto accepts = [&](double alpha, double f_trial) {
    return f_trial <= fbar + eta - cfg.gamma * alpha * alpha * f_x;
  };
  auto accept = [&](double alpha, int sign, TrialPoint&& p) {
    LineSearchStep step;
    step.alpha = alpha;
    step.d = sign < 0 ? Vector(-sv) : sv;
    step.x_trial = std::move(p.x);
    step.F_trial = std::move(p.F);
    step.f_trial = p.f;
    step.direction_sign = sign;
    step.evals = eval.count() - evals_before;
    return step;
  };

  for (;;) {
    TrialPoint minus_side = try_point(eval, x - alpha_plus * sv);
    if (accepts(alpha_plus, minus_side.f)) return accept(alpha_plus, -1, std::move(minus_side));

    TrialPoint plus_side = try_point(eval, x + alpha_minus * sv);
    if (accepts(alpha_minus, plus_side.f)) return accept(alpha_minus, +1, std::move(plus_side));

    alpha_plus = reduce_alpha(alpha_plus, f_x, minus_side.f, cfg.tau_min, cfg.tau_max);
    alpha_minus = reduce_alpha(alpha_minus, f_x, plus_side.f, cfg.tau_min, cfg.tau_max);
    if (alpha_plus < cfg.line_search_floor && alpha_minus < cfg.line_search_floor) {
      return std::nullopt;
    }
  }
}

Vector random_direction(std::mt19937_64& rng, Index n, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  double nrm = 0.0;
  do {
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
    nrm = v.norm();
  } while (!(nrm > 0.0));
  return v * (radius / nrm);
}

SolveReport solve_residual(const ResidualProblem& problem, const Vector& x0,
                           const SolverConfig& cfg, StepAccelerator* accelerator,
                           const IterationObserver& observer) {
  cfg.validate();
  if (x0.size() != problem.dim()) throw ConfigError("initial point has wrong dimension");
  if (!x0.allFinite()) throw ConfigError("initial point is not finite");

  const auto t0 = Clock::now();
  Evaluator eval(problem, cfg.max_fevals);
  SolveReport report;

  Vector x = x0;
  Vector F;
  try {
    F = eval(x);
  } catch (const DomainError&) {
    report.status = SolveStatus::evaluation_error;
    report.fevals = eval.count();
    report.final_residual_norm = std::numeric_limits<double>::infinity();
    report.solution = x;
    report.elapsed_seconds = seconds_since(t0);
    return report;
  }

  const double F0_norm = F.norm();
  NonmonotoneMemory history(cfg.memory_M);
  history.push(merit(F));

  std::mt19937_64 rng(cfg.random_safeguard.seed);
  double alpha_small = cfg.random_safeguard.alpha_small;

  Vector x_prev;
  Vector F_prev;
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

    double sigma = 1.0;
    if (k > 0) {
      sigma = cfg.sigma_strategy == SigmaStrategy::conservative
                  ? conservative_sigma(k, x_prev, x, F_norm, cfg.h_init, cfg.sigma_min, cfg.sigma_max)
                  : spectral_sigma(x - x_prev, F - F_prev, cfg.sigma_min, cfg.sigma_max);
    }
    const double fbar = history.max();
    const double eta = eta_schedule(k, F0_norm);

    Vector v = F;
    std::optional<LineSearchStep> step;
    AccelDecision decision;
    try {
      step = line_search(eval, x, F, v, sigma, fbar, eta, cfg);
      if (step && cfg.random_safeguard.enabled && step->alpha < alpha_small) {
        v = random_direction(rng, x.size(), F_norm);
        step = line_search(eval, x, F, v, sigma, fbar, eta, cfg);
        if (step && step->alpha < alpha_small) alpha_small *= 0.5;
      }
      if (!step) {
        report.status = SolveStatus::line_search_failure;
        break;
      }
      if (accelerator != nullptr) {
        decision = accelerator->accelerate(eval, x, F, step->x_trial, step->F_trial);
        if (!(merit(decision.F_next) <= step->f_trial)) {
          decision = AccelDecision{step->x_trial, step->F_trial, Branch::trial, decision.extra_evals,
                                   decision.memory_action};
        }
      } else {
        decision.x_next = step->x_trial;
        decision.F_next = step->F_trial;
      }
    } catch (const BudgetExhausted&) {
      report.status = SolveStatus::max_fevals;
      break;
    } catch (const DomainError&) {
      report.status = SolveStatus::evaluation_error;
      break;
    }

    if (observer) observer(IterationView{k, x, F, v, sigma, fbar, eta, *step, decision});

    TraceEntry entry;
    entry.k = k;
    entry.residual_norm = F_norm;
    entry.merit = merit(F);
    entry.alpha = step->alpha;
    entry.direction_sign = step->direction_sign;
    entry.branch = decision.branch;
    entry.sigma = sigma;
    entry.fbar = fbar;
    entry.eta = eta;
    entry.cumulative_fevals = eval.count();
    entry.elapsed_seconds = seconds_since(t0);
    report.trace.push_back(entry);

    x_prev = std::move(x);
    F_prev = std::move(F);
    x = std::move(decision.x_next);
    F = std::move(decision.F_next);
    history.push(merit(F));
    ++k;
  }

  report.iterations = k;
  report.fevals = eval.count();
  report.final_residual_norm = F.norm();
  report.solution = std::move(x);
  report.elapsed_seconds = seconds_since(t0);
  return report;
}

}  // namespace dfsane
