// Command-line front end: run a configured solve, verify a recorded trace,
// or list the built-in problems.
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "szoqq/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"szoqq — safe zeroth-order optimizer for unknown smooth constraints"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_path;
  std::string report_path;
  std::string problem_name;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Solve a configured problem; write trace and report");
  run->add_option("--config", config_path, "Run configuration JSON")->required();
  CLI::Option* run_trace = run->add_option("--trace", trace_path, "Trace CSV path (overrides config)");
  CLI::Option* run_report =
      run->add_option("--report", report_path, "Report JSON path (overrides config)");
  run->add_flag("--quiet", quiet, "Suppress the summary printout");

  CLI::App* verify = app.add_subcommand("verify", "Replay a recorded trace and audit its samples");
  verify->add_option("--trace", trace_path, "Trace CSV to verify")->required();
  CLI::Option* verify_report = verify->add_option(
      "--report", report_path, "Report JSON (default: trace path with extension .report.json)");
  CLI::Option* verify_problem =
      verify->add_option("--problem", problem_name, "Expected problem name");
  verify->add_flag("--quiet", quiet, "Suppress the audit printout (exit code carries the verdict)");

  CLI::App* list = app.add_subcommand("list", "List the built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit clean; any usage error is a config error
  }

  if (run->parsed()) {
    szoqq::CliOverrides overrides;
    if (run_trace->count() > 0) overrides.trace_path = trace_path;
    if (run_report->count() > 0) overrides.report_path = report_path;
    overrides.quiet = quiet;
    return szoqq::cmd_run(config_path, overrides);
  }
  if (verify->parsed()) {
    std::optional<std::string> report;
    if (verify_report->count() > 0) report = report_path;
    std::optional<std::string> problem;
    if (verify_problem->count() > 0) problem = problem_name;
    return szoqq::cmd_verify(trace_path, report, problem, quiet);
  }
  if (list->parsed()) return szoqq::cmd_list();
  return 1;
}
