// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <optional>
#include <string>

#include "szoqq/driver.hpp"
#include "szoqq/problems.hpp"

namespace szoqq {

/// Fully validated run configuration, with scalar L/M already expanded to one
/// entry per constraint of the named problem.
struct RunConfig {
  std::string problem_name;
  ProblemParams problem_params;
  AlgorithmConfig algo;
  bool xi_auto = true;
  Vector lipschitz;
  Vector smoothness;
  double objective_lipschitz = 0.0;
  double objective_smoothness = 0.0;
  double epigraph_slack = 1.0;
  bool adaptation_enabled = true;
  double growth_factor = 2.0;
  bool lambda_adaptation = true;
  std::string trace_path = "trace.csv";
  std::string report_path;  ///< empty = derived from trace_path
  std::uint64_t seed = 1;
};

/// Parses and schema-checks a config JSON document. Unknown keys are rejected
/// at every level. Throws ConfigError; performs no oracle queries.
RunConfig load_run_config(const std::string& path);

/// Report path used when the config leaves it empty: trace path with its
/// extension replaced by ".report.json".
std::string derived_report_path(const std::string& trace_path);

struct CliOverrides {
  std::optional<std::string> trace_path;
  std::optional<std::string> report_path;
  bool quiet = false;
};

/// Loads the config, runs the solver, writes the trace CSV and JSON report.
/// Exit codes: 0 solved with certificate, 1 config/contract error,
/// 2 iteration cap, 3 oracle or subproblem failure.
int cmd_run(const std::string& config_path, const CliOverrides& overrides);

/// Replays a recorded run: rebuilds the problem from the report next to the
/// trace, reruns deterministically, checks the trace matches bit-for-bit
/// (wall time excluded), audits every sample against ground truth, and
/// recomputes the final KKT residual. Exit 0 iff the trace matches and no
/// sample was infeasible.
int cmd_verify(const std::string& trace_path, const std::optional<std::string>& report_path,
               const std::optional<std::string>& expected_problem, bool quiet);

/// Prints the problem registry.
int cmd_list();

}  // namespace szoqq
