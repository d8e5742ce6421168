#include "dfsane/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace dfsane::bench {

namespace {

constexpr int kUsage = 64;

struct Options {
  std::vector<std::string> problems{"bratu3d"};
  std::vector<int> n_ps{10};
  std::vector<double> thetas{-100.0};
  std::vector<std::string> methods{"accel-dfsane"};
  std::vector<int> ps{5};
  RunSpec base;
  std::string sigma_strategy;
  std::string trace_path;
  std::string json_path;
  std::string csv_path;
  int workers = 1;
};

void add_common(CLI::App& cmd, Options& o, bool lists) {
  auto* problem = cmd.add_option("--problem", o.problems, "bratu2d, bratu3d or linear");
  auto* np = cmd.add_option("--np", o.n_ps, "grid points per axis, boundary included");
  auto* theta = cmd.add_option("--theta", o.thetas, "reaction coefficient");
  auto* method = cmd.add_option("--method", o.methods, "accel-dfsane, dfsane or anderson");
  auto* p = cmd.add_option("--p", o.ps, "acceleration depth");
  for (auto* opt : {problem, np, theta, method, p}) {
    if (lists) opt->delimiter(',');
    else opt->expected(1);
  }
  cmd.add_option("--n", o.base.n, "dimension of the linear problem");
  cmd.add_option("--beta", o.base.beta, "Anderson damping");
  cmd.add_option("--h-init", o.base.h_init, "conservative sigma factor");
  cmd.add_option("--h-small", o.base.h_small, "rank-drop probe step");
  cmd.add_option("--h-large", o.base.h_large, "restart probe step");
  cmd.add_option("--eps-scale", o.base.eps_scale, "eps = scale * sqrt(n)");
  cmd.add_option("--max-iter", o.base.max_iters, "iteration budget");
  cmd.add_option("--max-fevals", o.base.max_fevals, "residual evaluation budget");
  cmd.add_option("--sigma-strategy", o.sigma_strategy, "conservative or spectral")
      ->check(CLI::IsMember({"conservative", "spectral"}));
  cmd.add_option("--seed", o.base.seed, "random seed");
  cmd.add_option("--json", o.json_path, "JSON report path (default stdout for run)");
  cmd.add_option("--trace", o.trace_path, "CSV convergence trace path");
  cmd.add_option("--csv", o.csv_path, "CSV table path (default stdout)");
  cmd.add_option("--workers", o.workers, "concurrent runs")->check(CLI::PositiveNumber);
}

RunSpec make_spec(const Options& o, const std::string& problem, int n_p, double theta,
                  const std::string& method, int p) {
  RunSpec spec = o.base;
  spec.problem = problem;
  spec.n_p = n_p;
  spec.theta = theta;
  const auto m = parse_method(method);
  if (!m) throw UsageError("unknown method '" + method + "'");
  spec.method = *m;
  spec.p = p;
  if (!o.sigma_strategy.empty()) {
    spec.sigma_strategy = o.sigma_strategy == "spectral" ? SigmaStrategy::spectral : SigmaStrategy::conservative;
  }
  return spec;
}

void check_usage(const RunSpec& spec) {
  if (spec.problem != "bratu2d" && spec.problem != "bratu3d" && spec.problem != "linear") {
    throw UsageError("unknown problem '" + spec.problem + "'");
  }
  if (spec.problem != "linear" && spec.n_p < 3) throw UsageError("--np must be at least 3");
}

// Problem-major, then n_p, theta, method.
std::vector<RunSpec> expand(const Options& o) {
  std::vector<RunSpec> specs;
  for (const auto& problem : o.problems) {
    for (int n_p : o.n_ps) {
      for (double theta : o.thetas) {
        for (const auto& method : o.methods) {
          for (int p : o.ps) specs.push_back(make_spec(o, problem, n_p, theta, method, p));
        }
      }
    }
  }
  if (specs.empty()) throw UsageError("empty sweep");
  for (const auto& s : specs) check_usage(s);
  return specs;
}

int worst_exit(const std::vector<RunResult>& results) {
  int code = 0;
  for (const auto& r : results) {
    if (r.exit_code == 1) return 1;
    code = std::max(code, r.exit_code);
  }
  return code;
}

template <class Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(file);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmark harness for derivative-free residual solvers"};
  app.require_subcommand(1);

  Options run_opts;
  Options compare_opts;
  Options sweep_opts;
  auto* run_cmd = app.add_subcommand("run", "solve one problem and write a JSON report");
  auto* compare_cmd = app.add_subcommand("compare", "sweep problems and methods, write a CSV table");
  auto* sweep_cmd = app.add_subcommand("sweep-p", "sweep the acceleration depth, write a CSV table");
  add_common(*run_cmd, run_opts, false);
  add_common(*compare_cmd, compare_opts, true);
  add_common(*sweep_cmd, sweep_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) {
      const auto specs = expand(run_opts);
      const RunResult r = run(specs.front());
      emit(run_opts.json_path, out, [&](std::ostream& os) { os << to_json(r).dump(2) << '\n'; });
      if (!run_opts.trace_path.empty()) {
        emit(run_opts.trace_path, out, [&](std::ostream& os) { write_trace_csv(os, r.report); });
      }
      if (!r.error.empty()) err << "error: " << r.error << '\n';
      return r.exit_code;
    }

    Options& o = compare_cmd->parsed() ? compare_opts : sweep_opts;
    const auto results = run_all(expand(o), o.workers);
    emit(o.csv_path, out, [&](std::ostream& os) {
      if (compare_cmd->parsed()) write_compare_csv(os, results);
      else write_sweep_csv(os, results);
    });
    if (!o.json_path.empty()) {
      nlohmann::ordered_json all = nlohmann::ordered_json::array();
      for (const auto& r : results) all.push_back(to_json(r));
      emit(o.json_path, out, [&](std::ostream& os) { os << all.dump(2) << '\n'; });
    }
    return worst_exit(results);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dfsane::bench
