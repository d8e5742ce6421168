#include "dfsane/bench.hpp"

#include "dfsane/problem_suite.hpp"
#include "dfsane/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

namespace dfsane::bench {

namespace {

struct StepDefaults {
  double h_init;
  double h_small;
  double h_large;
};

StepDefaults step_defaults(std::string_view problem) {
  if (problem == "bratu3d") return {1.0, 0.1, 0.1};
  return {0.01, 1e-4, 0.1};
}

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

struct Ms {
  double seconds;
};

std::ostream& operator<<(std::ostream& os, Ms t) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::fixed << std::setprecision(3) << t.seconds;
  os.flags(flags);
  os.precision(prec);
  return os;
}

nlohmann::ordered_json params_json(const RunSpec& spec) {
  if (spec.problem == "linear") return {{"n", spec.n}};
  return {{"n_p", spec.n_p}, {"theta", spec.theta}};
}

nlohmann::ordered_json config_json(const RunSpec& spec, const SolverConfig& cfg) {
  return {
      {"gamma", cfg.gamma},
      {"sigma_min", cfg.sigma_min},
      {"sigma_max", cfg.sigma_max},
      {"tau_min", cfg.tau_min},
      {"tau_max", cfg.tau_max},
      {"memory_M", cfg.memory_M},
      {"eps_scale", spec.eps_scale},
      {"h_init", cfg.h_init},
      {"h_small", cfg.h_small},
      {"h_large", cfg.h_large},
      {"p", cfg.depth_p},
      {"beta", spec.beta},
      {"max_iters", cfg.max_iters},
      {"max_fevals", cfg.max_fevals},
      {"sigma_strategy", std::string(to_string(cfg.sigma_strategy))},
      {"accel", std::string(to_string(cfg.accel.kind))},
      {"seed", spec.seed},
  };
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::accel_dfsane: return "accel-dfsane";
    case Method::dfsane: return "dfsane";
    case Method::anderson: return "anderson";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::accel_dfsane, Method::dfsane, Method::anderson}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::unique_ptr<ResidualProblem> make_problem(const RunSpec& spec) {
  if (spec.problem == "bratu2d" || spec.problem == "bratu3d") {
    if (spec.n_p < 3) throw UsageError("--np must be at least 3");
    const auto kind = spec.problem == "bratu2d" ? BratuProblem::Kind::two_d : BratuProblem::Kind::three_d;
    return std::make_unique<BratuProblem>(kind, spec.n_p, spec.theta);
  }
  if (spec.problem == "linear") return std::make_unique<LinearProblem>(diagonal_linear_problem(spec.n));
  throw UsageError("unknown problem '" + spec.problem + "'");
}

SolverConfig make_config(const RunSpec& spec, Index n) {
  SolverConfig cfg;
  switch (spec.method) {
    case Method::accel_dfsane: cfg = SolverConfig::accelerated(); break;
    case Method::dfsane: cfg = SolverConfig::dfsane(); break;
    case Method::anderson: cfg = SolverConfig::anderson(spec.beta); break;
  }
  const StepDefaults h = step_defaults(spec.problem);
  cfg.h_init = spec.h_init.value_or(h.h_init);
  cfg.h_small = spec.h_small.value_or(h.h_small);
  cfg.h_large = spec.h_large.value_or(h.h_large);
  cfg.depth_p = spec.p;
  cfg.eps = spec.eps_scale * std::sqrt(static_cast<double>(n));
  cfg.max_iters = spec.max_iters;
  cfg.max_fevals = spec.max_fevals;
  if (spec.sigma_strategy) cfg.sigma_strategy = *spec.sigma_strategy;
  cfg.random_safeguard.seed = spec.seed;
  return cfg;
}

int exit_code(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::converged: return 0;
    case SolveStatus::max_iterations:
    case SolveStatus::max_fevals: return 2;
    default: return 1;
  }
}

RunResult run(const RunSpec& spec) {
  RunResult result;
  result.spec = spec;
  std::unique_ptr<ResidualProblem> problem;
  try {
    problem = make_problem(spec);
    result.n = problem->dim();
    result.config = make_config(spec, result.n);
    result.eps = result.config.eps;
    result.report = solve(*problem, Vector::Zero(result.n), result.config);
  } catch (const ConfigError& e) {
    result.status = "config_error";
    result.error = e.what();
    result.exit_code = 1;
    return result;
  }
  result.status = std::string(to_string(result.report.status));
  result.exit_code = exit_code(result.report.status);
  return result;
}

std::vector<RunResult> run_all(const std::vector<RunSpec>& specs, int workers) {
  std::vector<RunResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) results[i] = run(specs[i]);
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n_threads, specs.size()); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json j = {
      {"problem", r.spec.problem},
      {"params", params_json(r.spec)},
      {"method", std::string(to_string(r.spec.method))},
      {"n", r.n},
      {"eps", r.eps},
      {"status", r.status},
      {"iterations", r.report.iterations},
      {"fevals", r.report.fevals},
      {"final_residual_norm", r.report.final_residual_norm},
      {"elapsed_seconds", round_ms(r.report.elapsed_seconds)},
      {"config_echo", config_json(r.spec, r.config)},
  };
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

void write_trace_csv(std::ostream& out, const SolveReport& report) {
  out << "k,residual_norm,cumulative_fevals,elapsed_seconds,branch\n";
  out << std::setprecision(17);
  for (const auto& e : report.trace) {
    out << e.k << ',' << e.residual_norm << ',' << e.cumulative_fevals << ','
        << Ms{e.elapsed_seconds} << ',' << to_string(e.branch) << '\n';
  }
}

void write_compare_csv(std::ostream& out, const std::vector<RunResult>& results) {
  out << "problem,n_p,theta,n,method,status,final_residual_norm,iterations,fevals,elapsed_seconds\n";
  out << std::setprecision(17);
  for (const auto& r : results) {
    out << r.spec.problem << ',' << r.spec.n_p << ',' << r.spec.theta << ',' << r.n << ','
        << to_string(r.spec.method) << ',' << r.status << ',' << r.report.final_residual_norm << ','
        << r.report.iterations << ',' << r.report.fevals << ',' << Ms{r.report.elapsed_seconds}
        << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<RunResult>& results) {
  out << "p,iterations,fevals,elapsed_seconds,status\n";
  for (const auto& r : results) {
    out << r.spec.p << ',' << r.report.iterations << ',' << r.report.fevals << ','
        << Ms{r.report.elapsed_seconds} << ',' << r.status << '\n';
  }
}

}  // namespace dfsane::bench
