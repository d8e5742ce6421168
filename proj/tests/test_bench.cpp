#include "dfsane/bench.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace dfsane;
using namespace dfsane::bench;
using Json = nlohmann::ordered_json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dfsane_bench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const std::string& text, std::vector<std::string>* header_out = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  Table rows;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  if (header_out) *header_out = header;
  return rows;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) { return std::string(DFSANE_TEST_TMP) + "/" + name; }

const std::vector<std::string> kReportKeys{"problem", "params", "method", "n", "eps", "status", "iterations",
                                           "fevals", "final_residual_norm", "elapsed_seconds", "config_echo"};

void check_report_keys(const Json& j) {
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  keys.erase(std::remove(keys.begin(), keys.end(), "error"), keys.end());
  CHECK(keys == kReportKeys);
}

}  // namespace

TEST_SUITE("bench_cli") {

TEST_CASE("3D Bratu row with the table settings") {
  const auto r = cli({"run", "--problem", "bratu3d", "--np", "10", "--theta", "-100", "--method", "accel-dfsane",
                      "--p", "5", "--h-init", "1", "--h-small", "0.1", "--h-large", "0.1"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  check_report_keys(j);
  CHECK(j["status"] == "converged");
  CHECK(j["n"] == 512);
  CHECK(j["eps"].get<double>() == doctest::Approx(1e-6 * std::sqrt(512.0)));
  CHECK(j["final_residual_norm"].get<double>() <= 1e-6 * std::sqrt(512.0));
  CHECK(j["params"]["theta"] == -100.0);
  CHECK(j["config_echo"]["h_init"] == 1.0);
  CHECK(j["iterations"] == 126);
  CHECK(j["fevals"] == 308);
}

TEST_CASE("linear problem converges quickly under spectral steps") {
  const auto r = cli({"run", "--problem", "linear", "--n", "4", "--method", "dfsane"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["status"] == "converged");
  CHECK(j["iterations"].get<int>() <= 50);
  CHECK(j["params"]["n"] == 4);
}

TEST_CASE("report matches the golden file") {
  const auto r = cli({"run", "--problem", "linear", "--n", "4", "--method", "dfsane"});
  auto j = Json::parse(r.out);
  auto golden = Json::parse(slurp(std::string(DFSANE_GOLDEN_DIR) + "/run_linear_n4_dfsane.json"));
  j.erase("elapsed_seconds");
  golden.erase("elapsed_seconds");
  CHECK(j.dump() == golden.dump());
}

TEST_CASE("usage errors exit with 64") {
  CHECK(cli({"run", "--problem", "bratu2d", "--np", "2"}).code == 64);
  CHECK(cli({"run", "--problem", "heat"}).code == 64);
  CHECK(cli({"run", "--method", "newton"}).code == 64);
  CHECK(cli({"run", "--bogus"}).code == 64);
  CHECK(cli({}).code == 64);
  CHECK(cli({"compare", "--method", "dfsane,newton"}).code == 64);
  CHECK(cli({"sweep-p", "--np", "2", "--p", "3,4"}).code == 64);
}

TEST_CASE("configuration errors exit with 1 and still report every field") {
  const auto r = cli({"run", "--problem", "bratu2d", "--np", "5", "--p", "0"});
  CHECK(r.code == 1);
  const auto j = Json::parse(r.out);
  check_report_keys(j);
  CHECK(j["status"] == "config_error");
}

TEST_CASE("budget exhaustion exits with 2") {
  const auto r = cli({"run", "--problem", "bratu3d", "--np", "8", "--max-fevals", "20"});
  CHECK(r.code == 2);
  const auto j = Json::parse(r.out);
  CHECK(j["status"] == "max_fevals");
  CHECK(j["fevals"] == 20);
  CHECK(cli({"run", "--problem", "bratu3d", "--np", "8", "--max-iter", "3"}).code == 2);
}

TEST_CASE("runs are deterministic") {
  const std::vector<std::string> args{"run", "--problem", "bratu2d", "--np", "20", "--theta", "-100"};
  auto a = Json::parse(cli(args).out);
  auto b = Json::parse(cli(args).out);
  a.erase("elapsed_seconds");
  b.erase("elapsed_seconds");
  CHECK(a == b);
}

TEST_CASE("trace CSV") {
  const std::string path = temp_path("trace.csv");
  const auto r = cli({"run", "--problem", "bratu3d", "--np", "8", "--trace", path});
  REQUIRE(r.code == 0);
  std::vector<std::string> header;
  const auto rows = read_csv(slurp(path), &header);
  CHECK(header == std::vector<std::string>{"k", "residual_norm", "cumulative_fevals", "elapsed_seconds", "branch"});
  const auto j = Json::parse(r.out);
  CHECK(rows.size() == j["iterations"].get<std::size_t>());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stoul(rows[i].at("k")) == std::stoul(rows[i - 1].at("k")) + 1);
    CHECK(std::stoul(rows[i].at("cumulative_fevals")) > std::stoul(rows[i - 1].at("cumulative_fevals")));
    CHECK(std::stod(rows[i].at("elapsed_seconds")) >= std::stod(rows[i - 1].at("elapsed_seconds")));
  }
  for (const auto& row : rows) CHECK((row.at("branch") == "trial" || row.at("branch") == "accelerated"));
  std::remove(path.c_str());
}

TEST_CASE("compare emits one row per instance and method") {
  const auto r = cli({"compare", "--problem", "bratu3d", "--np", "5,6,7", "--theta", "-100", "--method",
                      "accel-dfsane,dfsane", "--max-fevals", "400"});
  std::vector<std::string> header;
  const auto rows = read_csv(r.out, &header);
  CHECK(header == std::vector<std::string>{"problem", "n_p", "theta", "n", "method", "status", "final_residual_norm",
                                           "iterations", "fevals", "elapsed_seconds"});
  REQUIRE(rows.size() == 6);
  const std::vector<std::pair<std::string, std::string>> order{
      {"5", "accel-dfsane"}, {"5", "dfsane"}, {"6", "accel-dfsane"},
      {"6", "dfsane"},       {"7", "accel-dfsane"}, {"7", "dfsane"}};
  bool any_failed = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].at("n_p") == order[i].first);
    CHECK(rows[i].at("method") == order[i].second);
    CHECK(rows[i].at("theta") == "-100");
    any_failed = any_failed || rows[i].at("status") != "converged";
  }
  // The plain method cannot finish n_p = 6 in 400 evaluations; its row is still there.
  CHECK(any_failed);
  CHECK(r.code == 2);
}

TEST_CASE("compare parses negative theta lists and is independent of worker count") {
  const std::vector<std::string> base{"compare", "--problem", "bratu2d,bratu3d", "--np", "6", "--theta", "-100,10",
                                      "--method", "accel-dfsane,dfsane,anderson", "--max-fevals", "3000"};
  auto one = base;
  one.insert(one.end(), {"--workers", "1"});
  auto three = base;
  three.insert(three.end(), {"--workers", "3"});
  auto a = read_csv(cli(one).out);
  auto b = read_csv(cli(three).out);
  REQUIRE(a.size() == 12);
  REQUIRE(b.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].erase("elapsed_seconds");
    b[i].erase("elapsed_seconds");
    CHECK(a[i] == b[i]);
  }
  CHECK(a[0].at("problem") == "bratu2d");
  CHECK(a[0].at("theta") == "-100");
  CHECK(a[3].at("theta") == "10");
  CHECK(a[6].at("problem") == "bratu3d");
}

TEST_CASE("sweep over p") {
  const auto r = cli({"sweep-p", "--problem", "bratu3d", "--np", "8", "--p", "3,4,5,6"});
  std::vector<std::string> header;
  const auto rows = read_csv(r.out, &header);
  CHECK(header == std::vector<std::string>{"p", "iterations", "fevals", "elapsed_seconds", "status"});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].at("p") == std::to_string(3 + i));

  const auto single = read_csv(cli({"sweep-p", "--problem", "bratu3d", "--np", "8", "--p", "5"}).out);
  REQUIRE(single.size() == 1);
  const auto plain = Json::parse(cli({"run", "--problem", "bratu3d", "--np", "8", "--p", "5"}).out);
  CHECK(std::stoul(single[0].at("iterations")) == plain["iterations"].get<std::size_t>());
  CHECK(std::stoul(single[0].at("fevals")) == plain["fevals"].get<std::size_t>());
}

TEST_CASE("JSON for sweeps and per-problem step defaults") {
  const std::string path = temp_path("sweep.json");
  const auto r = cli({"compare", "--problem", "bratu2d,bratu3d,linear", "--np", "5", "--json", path});
  CHECK(r.code == 0);
  const auto all = Json::parse(slurp(path));
  REQUIRE(all.size() == 3);
  for (const auto& j : all) check_report_keys(j);
  CHECK(all[0]["config_echo"]["h_init"] == 0.01);
  CHECK(all[0]["config_echo"]["h_small"] == 1e-4);
  CHECK(all[0]["config_echo"]["h_large"] == 0.1);
  CHECK(all[1]["config_echo"]["h_init"] == 1.0);
  CHECK(all[1]["config_echo"]["h_small"] == 0.1);
  CHECK(all[1]["config_echo"]["h_large"] == 0.1);
  CHECK(all[1]["config_echo"]["sigma_max"] == 1.0);
  std::remove(path.c_str());
}

TEST_CASE("method defaults and overrides") {
  RunSpec spec;
  spec.problem = "bratu2d";
  spec.n_p = 12;
  spec.method = Method::dfsane;
  auto cfg = make_config(spec, 100);
  CHECK(cfg.sigma_strategy == SigmaStrategy::spectral);
  CHECK(cfg.accel.kind == AccelKind::none);
  CHECK(cfg.eps == doctest::Approx(1e-5));
  spec.sigma_strategy = SigmaStrategy::conservative;
  spec.eps_scale = 1e-8;
  cfg = make_config(spec, 100);
  CHECK(cfg.sigma_strategy == SigmaStrategy::conservative);
  CHECK(cfg.eps == doctest::Approx(1e-7));
  spec.method = Method::anderson;
  spec.beta = 0.25;
  CHECK(make_config(spec, 100).accel.beta == 0.25);

  CHECK(parse_method("accel-dfsane") == Method::accel_dfsane);
  CHECK_FALSE(parse_method("broyden"));
  CHECK(exit_code(SolveStatus::line_search_failure) == 1);
  CHECK(exit_code(SolveStatus::evaluation_error) == 1);
  CHECK(exit_code(SolveStatus::max_iterations) == 2);
}

TEST_CASE("help exits cleanly") {
  const auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("sweep-p") != std::string::npos);
}

}  // TEST_SUITE
