#pragma once

#include "dfsane/problem.hpp"
#include "dfsane/residual_core.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dfsane::bench {

enum class Method { accel_dfsane, dfsane, anderson };

[[nodiscard]] std::string_view to_string(Method m) noexcept;
[[nodiscard]] std::optional<Method> parse_method(std::string_view name);

/// Bad problem/method names, impossible grids, empty sweeps.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunSpec {
  std::string problem = "bratu3d";  // bratu2d | bratu3d | linear
  int n_p = 10;
  Index n = 4;  // linear only
  double theta = -100.0;
  Method method = Method::accel_dfsane;
  int p = 5;
  double beta = 5e-5;
  // Unset means the per-problem default.
  std::optional<double> h_init;
  std::optional<double> h_small;
  std::optional<double> h_large;
  double eps_scale = 1e-6;
  std::size_t max_iters = 100000;
  std::size_t max_fevals = 1000000;
  std::optional<SigmaStrategy> sigma_strategy;
  std::uint64_t seed = 0;
};

struct RunResult {
  RunSpec spec;
  Index n = 0;
  double eps = 0.0;
  SolverConfig config;
  SolveReport report;
  std::string status;  // solve status, or "config_error"
  std::string error;
  int exit_code = 1;
};

/// Throws UsageError for unknown names or n_p < 3 and ConfigError for n < 1.
[[nodiscard]] std::unique_ptr<ResidualProblem> make_problem(const RunSpec& spec);

/// Solver settings for spec on a problem of dimension n; eps = eps_scale sqrt(n).
[[nodiscard]] SolverConfig make_config(const RunSpec& spec, Index n);

/// 0 converged, 2 budget exhausted, 1 otherwise.
[[nodiscard]] int exit_code(SolveStatus status) noexcept;

/// Solves once from x0 = 0. Throws UsageError only.
[[nodiscard]] RunResult run(const RunSpec& spec);

/// Runs each spec on up to `workers` threads; results keep input order.
[[nodiscard]] std::vector<RunResult> run_all(const std::vector<RunSpec>& specs, int workers);

[[nodiscard]] nlohmann::ordered_json to_json(const RunResult& result);

/// k,residual_norm,cumulative_fevals,elapsed_seconds,branch
void write_trace_csv(std::ostream& out, const SolveReport& report);

/// problem,n_p,theta,n,method,status,final_residual_norm,iterations,fevals,elapsed_seconds
void write_compare_csv(std::ostream& out, const std::vector<RunResult>& results);

/// p,iterations,fevals,elapsed_seconds,status
void write_sweep_csv(std::ostream& out, const std::vector<RunResult>& results);

/// Command-line entry point: `run`, `compare` or `sweep-p`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfsane::bench
