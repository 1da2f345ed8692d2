#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "szoqq/cli.hpp"
#include "szoqq/errors.hpp"

using namespace szoqq;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "szoqq_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string toy_config(const std::string& trace_path) {
  return std::string(R"({
  "problem": {"name": "toy"},
  "eta": 0.01,
  "mu": 0.001,
  "lambda_cap": 1.5,
  "xi": "auto",
  "lipschitz": 5.0,
  "smoothness": 3.0,
  "output": {"trace": ")") +
         trace_path + "\"}\n}\n";
}

/// Runs a callable while capturing everything it writes to stdout.
template <typename Fn>
std::pair<int, std::string> capture_stdout(Fn&& fn) {
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  int code = fn();
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

}  // namespace

TEST_CASE("a valid config loads with expanded constants and defaults") {
  TempDir dir;
  const std::string path = dir.file("config.json");
  write_file(path, toy_config(dir.file("trace.csv")));

  const RunConfig config = load_run_config(path);
  CHECK(config.problem_name == "toy");
  CHECK(config.algo.eta == 0.01);
  CHECK(config.xi_auto);
  REQUIRE(config.lipschitz.size() == 3);
  CHECK(config.lipschitz[2] == 5.0);
  CHECK(config.objective_lipschitz == 5.0);   // defaults to the largest bound
  CHECK(config.objective_smoothness == 3.0);
  CHECK(config.epigraph_slack == 1.0);
  CHECK(config.adaptation_enabled);
  CHECK(config.growth_factor == 2.0);
  CHECK(config.seed == 1);
}

TEST_CASE("per-constraint arrays and explicit knobs are honored") {
  TempDir dir;
  const std::string path = dir.file("config.json");
  write_file(path, R"({
    "problem": {"name": "toy"},
    "eta": 0.1, "mu": 0.01, "lambda_cap": 2.0, "kappa": 3.0,
    "xi": 0.001,
    "lipschitz": [5.0, 6.0, 7.0],
    "smoothness": [3.0, 3.5, 4.0],
    "objective_lipschitz": 9.0,
    "objective_smoothness": 8.0,
    "epigraph_slack": 0.5,
    "adaptation": {"enabled": false, "growth_factor": 4.0, "lambda_enabled": false},
    "max_iterations": 77,
    "tolerances": {"sp1": 1e-8, "sp2": 1e-8, "max_dual_iterations": 500},
    "seed": 11
  })");

  const RunConfig config = load_run_config(path);
  CHECK_FALSE(config.xi_auto);
  CHECK(config.algo.xi == 0.001);
  CHECK(config.algo.kappa == 3.0);
  CHECK(config.lipschitz[1] == 6.0);
  CHECK(config.smoothness[2] == 4.0);
  CHECK(config.objective_lipschitz == 9.0);
  CHECK_FALSE(config.adaptation_enabled);
  CHECK(config.growth_factor == 4.0);
  CHECK_FALSE(config.lambda_adaptation);
  CHECK(config.algo.max_iterations == 77);
  CHECK(config.algo.sp1_tolerance == 1e-8);
  CHECK(config.algo.max_dual_iterations == 500);
  CHECK(config.seed == 11);
}

TEST_CASE("schema violations are rejected before any oracle is built") {
  TempDir dir;
  const std::string path = dir.file("config.json");

  auto expect_reject = [&](const std::string& body, const char* needle) {
    write_file(path, body);
    try {
      load_run_config(path);
      FAIL_CHECK("expected rejection: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_reject(R"({"problem": {"name": "toy"}, "eta": 0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": 1.0,
                    "smoothness": 1.0, "surprise": true})",
                "surprise");
  expect_reject(R"({"problem": {"name": "toy", "extra": 1}, "eta": 0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": 1.0, "smoothness": 1.0})",
                "extra");
  expect_reject(R"({"problem": {"name": "toy"}, "eta": 0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": 1.0, "smoothness": 1.0,
                    "adaptation": {"rate": 2.0}})",
                "rate");
  expect_reject(R"({"problem": {"name": "toy"}, "eta": 0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "never", "lipschitz": 1.0, "smoothness": 1.0})",
                "xi");
  expect_reject(R"({"problem": {"name": "toy"}, "eta": 0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": [1.0, 1.0],
                    "smoothness": 1.0})",
                "lipschitz");
  expect_reject(R"({"problem": {"name": "toy", "d": 4}, "eta": 0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": 1.0, "smoothness": 1.0})",
                "random");
  expect_reject(R"({"problem": {"name": "toy"}, "eta": -0.1, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": 1.0, "smoothness": 1.0})",
                "eta");
  expect_reject(R"({"problem": {"name": "toy"}, "mu": 0.01,
                    "lambda_cap": 1.0, "xi": "auto", "lipschitz": 1.0, "smoothness": 1.0})",
                "eta");
  expect_reject("{ not json", "malformed");
  CHECK_THROWS_AS(load_run_config(dir.file("missing.json")), ConfigError);
}

TEST_CASE("report paths derive from the trace path by extension") {
  CHECK(derived_report_path("a/b.csv") == "a/b.report.json");
  CHECK(derived_report_path("trace") == "trace.report.json");
  CHECK(derived_report_path("a.dir/trace") == "a.dir/trace.report.json");
  CHECK(derived_report_path("runs/toy.trace.csv") == "runs/toy.trace.report.json");
}

TEST_CASE("run, verify, tamper and mismatch round trip through the command layer") {
  TempDir dir;
  const std::string config_path = dir.file("config.json");
  const std::string trace_path = dir.file("trace.csv");
  write_file(config_path, toy_config(trace_path));

  CliOverrides quiet;
  quiet.quiet = true;
  REQUIRE(cmd_run(config_path, quiet) == 0);
  REQUIRE(fs::exists(trace_path));
  REQUIRE(fs::exists(dir.file("trace.report.json")));

  auto [ok_code, ok_out] = capture_stdout([&] {
    return cmd_verify(trace_path, std::nullopt, std::nullopt, false);
  });
  CHECK(ok_code == 0);
  CHECK(ok_out.find("infeasible_samples: 0") != std::string::npos);
  CHECK(ok_out.find("verdict: clean") != std::string::npos);

  CHECK(cmd_verify(trace_path, std::nullopt, std::string("toy"), true) == 0);
  CHECK(cmd_verify(trace_path, std::nullopt, std::string("control"), true) == 1);

  // Rewrite the iteration index of the first data row: the digest must catch it.
  std::ifstream in(trace_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string contents = buffer.str();
  const auto pos = contents.find('\n');
  REQUIRE(pos != std::string::npos);
  REQUIRE(contents[pos + 1] == '0');
  contents[pos + 1] = '7';
  write_file(trace_path, contents);
  CHECK(cmd_verify(trace_path, std::nullopt, std::nullopt, true) == 1);
}

TEST_CASE("exit codes separate configuration, iteration cap and success") {
  TempDir dir;
  CliOverrides quiet;
  quiet.quiet = true;

  CHECK(cmd_run(dir.file("missing.json"), quiet) == 1);

  const std::string bad = dir.file("bad.json");
  write_file(bad, "{\"problem\": 3}");
  CHECK(cmd_run(bad, quiet) == 1);

  const std::string capped = dir.file("capped.json");
  write_file(capped, R"({
    "problem": {"name": "toy"},
    "eta": 0.01, "mu": 0.001, "lambda_cap": 1.5,
    "xi": "auto", "lipschitz": 5.0, "smoothness": 3.0,
    "max_iterations": 3,
    "output": {"trace": ")" + dir.file("capped.csv") + R"("}
  })");
  CHECK(cmd_run(capped, quiet) == 2);
}

TEST_CASE("the environment seed overrides the configured one and is echoed") {
  TempDir dir;
  const std::string config_path = dir.file("config.json");
  const std::string trace_path = dir.file("trace.csv");
  write_file(config_path, R"({
    "problem": {"name": "random", "d": 3, "m": 2},
    "eta": 0.05, "mu": 0.001, "lambda_cap": 2.0,
    "xi": "auto", "lipschitz": 30.0, "smoothness": 12.0,
    "seed": 1,
    "output": {"trace": ")" + trace_path + R"("}
  })");

  ::setenv("SZOQQ_SEED", "9", 1);
  CliOverrides quiet;
  quiet.quiet = true;
  const int code = cmd_run(config_path, quiet);
  ::unsetenv("SZOQQ_SEED");
  REQUIRE(code == 0);

  std::ifstream report_in(dir.file("trace.report.json"));
  const nlohmann::json report = nlohmann::json::parse(report_in);
  CHECK(report.at("problem").at("seed").get<int>() == 9);
  CHECK(report.at("result").at("reason").get<std::string>() == "both_conditions_met");

  // The seed stored in the report keeps verification deterministic.
  CHECK(cmd_verify(trace_path, std::nullopt, std::string("random"), true) == 0);
}

TEST_CASE("explicit output overrides win over the config") {
  TempDir dir;
  const std::string config_path = dir.file("config.json");
  write_file(config_path, toy_config(dir.file("ignored.csv")));

  CliOverrides overrides;
  overrides.quiet = true;
  overrides.trace_path = dir.file("override.csv");
  overrides.report_path = dir.file("override_report.json");
  REQUIRE(cmd_run(config_path, overrides) == 0);
  CHECK(fs::exists(dir.file("override.csv")));
  CHECK(fs::exists(dir.file("override_report.json")));
  CHECK_FALSE(fs::exists(dir.file("ignored.csv")));

  CHECK(cmd_verify(dir.file("override.csv"), dir.file("override_report.json"), std::nullopt,
                   true) == 0);
}

TEST_CASE("the problem listing names every registered benchmark") {
  auto [code, out] = capture_stdout([] { return cmd_list(); });
  CHECK(code == 0);
  CHECK(out.find("toy (d=2, m=3)") != std::string::npos);
  CHECK(out.find("control (d=12, m=48)") != std::string::npos);
  CHECK(out.find("random") != std::string::npos);
}
