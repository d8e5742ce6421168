#include "dfsane/solver.hpp"

#include "dfsane/secant_accel.hpp"

namespace dfsane {

SolveReport solve(const ResidualProblem& problem, const Vector& x0, const SolverConfig& cfg,
                  const IterationObserver& observer) {
  cfg.validate();
  switch (cfg.accel.kind) {
    case AccelKind::none:
      return solve_residual(problem, x0, cfg, nullptr, observer);
    case AccelKind::secant: {
      SecantAccelerator accel(problem.dim(), cfg);
      return solve_residual(problem, x0, cfg, &accel, observer);
    }
    case AccelKind::anderson:
      return solve_anderson(problem, x0, cfg);
  }
  throw ConfigError("unknown acceleration mode");
}

}  // namespace dfsane
