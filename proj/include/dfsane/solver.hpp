#pragma once

#include "dfsane/residual_core.hpp"

namespace dfsane {

/// Runs the method selected by cfg.accel: the residual method with secant
/// acceleration, plain DF-SANE, or Anderson mixing. The observer is only
/// called by the residual-method variants.
[[nodiscard]] SolveReport solve(const ResidualProblem& problem, const Vector& x0,
                                const SolverConfig& cfg, const IterationObserver& observer = {});

}  // namespace dfsane
