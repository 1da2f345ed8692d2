#include "szoqq/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "szoqq/errors.hpp"
#include "szoqq/trace_io.hpp"

namespace szoqq {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const char* where,
                         std::initializer_list<const char*> known) {
  for (const auto& item : object.items()) {
    bool found = false;
    for (const char* key : known) {
      if (item.key() == key) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError(std::string("config: unknown key \"") + item.key() + "\" in " + where);
    }
  }
}

const json& require(const json& object, const char* key, const char* where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ConfigError(std::string("config: missing required key \"") + key + "\" in " + where);
  }
  return *it;
}

double as_number(const json& value, const char* key) {
  if (!value.is_number()) {
    throw ConfigError(std::string("config: \"") + key + "\" must be a number");
  }
  return value.get<double>();
}

int as_integer(const json& value, const char* key) {
  if (!value.is_number_integer()) {
    throw ConfigError(std::string("config: \"") + key + "\" must be an integer");
  }
  return value.get<int>();
}

std::string as_string(const json& value, const char* key) {
  if (!value.is_string()) {
    throw ConfigError(std::string("config: \"") + key + "\" must be a string");
  }
  return value.get<std::string>();
}

bool as_boolean(const json& value, const char* key) {
  if (!value.is_boolean()) {
    throw ConfigError(std::string("config: \"") + key + "\" must be a boolean");
  }
  return value.get<bool>();
}

/// "lipschitz"/"smoothness" accept a positive scalar (applied to every
/// constraint) or an array with exactly one positive entry per constraint.
Vector as_constants(const json& value, const char* key, int m) {
  Vector out(m);
  if (value.is_number()) {
    const double v = value.get<double>();
    if (!(v > 0.0)) {
      throw ConfigError(std::string("config: \"") + key + "\" must be > 0");
    }
    out.setConstant(v);
    return out;
  }
  if (!value.is_array()) {
    throw ConfigError(std::string("config: \"") + key + "\" must be a number or array");
  }
  if (static_cast<int>(value.size()) != m) {
    throw ConfigError(std::string("config: \"") + key + "\" must have " +
                      std::to_string(m) + " entries (one per constraint)");
  }
  for (int i = 0; i < m; ++i) {
    if (!value[i].is_number() || !(value[i].get<double>() > 0.0)) {
      throw ConfigError(std::string("config: \"") + key + "\" entries must be numbers > 0");
    }
    out[i] = value[i].get<double>();
  }
  return out;
}

int constraint_count_for(const std::string& name, const ProblemParams& params) {
  if (name == "random") return params.m;
  for (const auto& info : registry()) {
    if (info.name == name) return info.constraints;
  }
  throw ConfigError("unknown problem: " + name);
}

RunConfig parse_config(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown_keys(root, "top level",
                      {"problem", "eta", "mu", "lambda_cap", "kappa", "xi", "lipschitz",
                       "smoothness", "objective_lipschitz", "objective_smoothness",
                       "epigraph_slack", "adaptation", "max_iterations", "tolerances",
                       "output", "seed"});

  RunConfig config;

  const json& problem = require(root, "problem", "top level");
  if (!problem.is_object()) throw ConfigError("config: \"problem\" must be an object");
  reject_unknown_keys(problem, "\"problem\"", {"name", "d", "m"});
  config.problem_name = as_string(require(problem, "name", "\"problem\""), "problem.name");
  if (config.problem_name == "random") {
    config.problem_params.d = as_integer(require(problem, "d", "\"problem\""), "problem.d");
    config.problem_params.m = as_integer(require(problem, "m", "\"problem\""), "problem.m");
    if (config.problem_params.d < 1 || config.problem_params.m < 1) {
      throw ConfigError("config: problem.d and problem.m must be >= 1");
    }
  } else if (problem.contains("d") || problem.contains("m")) {
    throw ConfigError("config: problem.d/problem.m apply only to \"random\"");
  }

  config.algo.eta = as_number(require(root, "eta", "top level"), "eta");
  config.algo.mu = as_number(require(root, "mu", "top level"), "mu");
  config.algo.lambda_cap = as_number(require(root, "lambda_cap", "top level"), "lambda_cap");
  if (root.contains("kappa")) config.algo.kappa = as_number(root["kappa"], "kappa");

  const json& xi = require(root, "xi", "top level");
  if (xi.is_string()) {
    if (xi.get<std::string>() != "auto") {
      throw ConfigError("config: \"xi\" must be \"auto\" or a positive number");
    }
    config.xi_auto = true;
  } else if (xi.is_number()) {
    config.xi_auto = false;
    config.algo.xi = xi.get<double>();
  } else {
    throw ConfigError("config: \"xi\" must be \"auto\" or a positive number");
  }

  const int m = constraint_count_for(config.problem_name, config.problem_params);
  config.lipschitz = as_constants(require(root, "lipschitz", "top level"), "lipschitz", m);
  config.smoothness = as_constants(require(root, "smoothness", "top level"), "smoothness", m);

  config.objective_lipschitz = root.contains("objective_lipschitz")
                                   ? as_number(root["objective_lipschitz"], "objective_lipschitz")
                                   : config.lipschitz.maxCoeff();
  config.objective_smoothness =
      root.contains("objective_smoothness")
          ? as_number(root["objective_smoothness"], "objective_smoothness")
          : config.smoothness.maxCoeff();
  if (root.contains("epigraph_slack")) {
    config.epigraph_slack = as_number(root["epigraph_slack"], "epigraph_slack");
  }

  if (root.contains("adaptation")) {
    const json& adaptation = root["adaptation"];
    if (!adaptation.is_object()) throw ConfigError("config: \"adaptation\" must be an object");
    reject_unknown_keys(adaptation, "\"adaptation\"",
                        {"enabled", "growth_factor", "lambda_enabled"});
    if (adaptation.contains("enabled")) {
      config.adaptation_enabled = as_boolean(adaptation["enabled"], "adaptation.enabled");
    }
    if (adaptation.contains("growth_factor")) {
      config.growth_factor = as_number(adaptation["growth_factor"], "adaptation.growth_factor");
      if (!(config.growth_factor > 1.0)) {
        throw ConfigError("config: adaptation.growth_factor must be > 1");
      }
    }
    if (adaptation.contains("lambda_enabled")) {
      config.lambda_adaptation = as_boolean(adaptation["lambda_enabled"],
                                            "adaptation.lambda_enabled");
    }
  }

  if (root.contains("max_iterations")) {
    config.algo.max_iterations = as_integer(root["max_iterations"], "max_iterations");
  }

  if (root.contains("tolerances")) {
    const json& tolerances = root["tolerances"];
    if (!tolerances.is_object()) throw ConfigError("config: \"tolerances\" must be an object");
    reject_unknown_keys(tolerances, "\"tolerances\"", {"sp1", "sp2", "max_dual_iterations"});
    if (tolerances.contains("sp1")) {
      config.algo.sp1_tolerance = as_number(tolerances["sp1"], "tolerances.sp1");
    }
    if (tolerances.contains("sp2")) {
      config.algo.sp2_tolerance = as_number(tolerances["sp2"], "tolerances.sp2");
    }
    if (tolerances.contains("max_dual_iterations")) {
      config.algo.max_dual_iterations =
          as_integer(tolerances["max_dual_iterations"], "tolerances.max_dual_iterations");
    }
  }

  if (root.contains("output")) {
    const json& output = root["output"];
    if (!output.is_object()) throw ConfigError("config: \"output\" must be an object");
    reject_unknown_keys(output, "\"output\"", {"trace", "report"});
    if (output.contains("trace")) config.trace_path = as_string(output["trace"], "output.trace");
    if (output.contains("report")) {
      config.report_path = as_string(output["report"], "output.report");
    }
  }

  if (root.contains("seed")) {
    const json& seed = root["seed"];
    if (!seed.is_number_integer() || seed.get<std::int64_t>() < 0) {
      throw ConfigError("config: \"seed\" must be a nonnegative integer");
    }
    config.seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
  }

  try {
    config.algo.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(config.objective_lipschitz > 0.0) || !(config.objective_smoothness > 0.0)) {
    throw ConfigError("config: objective bounds must be > 0");
  }
  if (!(config.epigraph_slack > 0.0)) {
    throw ConfigError("config: epigraph_slack must be > 0");
  }
  return config;
}

RunOptions options_from_config(const RunConfig& config) {
  RunOptions options;
  options.algo = config.algo;
  if (config.xi_auto) options.algo.xi.reset();
  options.L = config.lipschitz;
  options.M = config.smoothness;
  options.growth_factor = config.growth_factor;
  options.constant_adaptation = config.adaptation_enabled;
  options.lambda_adaptation = config.lambda_adaptation;
  options.objective_lipschitz = config.objective_lipschitz;
  options.objective_smoothness = config.objective_smoothness;
  options.epigraph_slack = config.epigraph_slack;
  return options;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& value, const char* key) {
  if (!value.is_array()) {
    throw ConfigError(std::string("report: \"") + key + "\" must be an array");
  }
  Vector out(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = value[i].get<double>();
  }
  return out;
}

std::string digest_string(std::uint64_t digest) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(digest));
  return buffer;
}

struct ResidualSummary {
  std::optional<KktResidual> effective;
  std::optional<KktResidual> physical;
  std::optional<double> final_objective;  ///< physical objective at x̃
};

ResidualSummary summarize_residuals(const ProblemHandle& handle, const RunResult& result) {
  ResidualSummary out;
  const TerminationReport& report = result.report;
  if (report.x_tilde.size() == 0) return out;

  Vector x_phys = report.x_tilde;
  if (result.reformulated) x_phys = report.x_tilde.head(handle.truth->dimension());
  out.final_objective = handle.truth->value(x_phys, 0);

  if (report.lambda_tilde.size() != result.effective_constraints) return out;
  if ((report.lambda_tilde.array() < 0.0).any()) return out;

  if (result.reformulated) {
    const auto effective_truth = epigraph_truth(handle.truth);
    out.effective = kkt_residual(*effective_truth, report.x_tilde, report.lambda_tilde);
    const double lambda_epi = report.lambda_tilde[0];
    if (lambda_epi > 1e-9) {
      const Vector lambda_phys = report.lambda_tilde.tail(handle.truth->constraint_count()) /
                                 lambda_epi;
      out.physical = kkt_residual(*handle.truth, x_phys, lambda_phys);
    }
  } else {
    out.effective = kkt_residual(*handle.truth, report.x_tilde, report.lambda_tilde);
    out.physical = out.effective;
  }
  return out;
}

json residual_to_json(const KktResidual& r) {
  double max_comp = 0.0;
  for (double c : r.complementarity) max_comp = std::max(max_comp, c);
  return json{{"stationarity", r.stationarity},
              {"max_complementarity", max_comp},
              {"max_residual", r.max_residual},
              {"primal_feasible", r.primal_feasible}};
}

json build_report(const RunConfig& config, const ProblemHandle& handle,
                  const RunResult& result, const ResidualSummary& residuals) {
  double wall_total = 0.0;
  int doubling_events = 0;
  for (const auto& rec : result.trace) {
    wall_total += rec.wall_time_ms;
    for (const auto& event : rec.events) {
      if (event == "constant-doubling") ++doubling_events;
    }
  }

  json report;
  report["schema"] = "szoqq-report-v1";
  report["problem"] = {{"name", config.problem_name},
                       {"d", handle.oracle->dimension()},
                       {"m", handle.oracle->constraint_count()},
                       {"seed", config.seed}};
  if (config.problem_name == "random") {
    report["problem"]["params"] = {{"d", config.problem_params.d},
                                   {"m", config.problem_params.m}};
  }
  report["config"] = {{"eta", config.algo.eta},
                      {"mu", config.algo.mu},
                      {"lambda_cap", config.algo.lambda_cap},
                      {"kappa", config.algo.kappa},
                      {"xi_mode", config.xi_auto ? "auto" : "fixed"},
                      {"xi", result.xi_resolved},
                      {"lipschitz", vector_to_json(config.lipschitz)},
                      {"smoothness", vector_to_json(config.smoothness)},
                      {"objective_lipschitz", config.objective_lipschitz},
                      {"objective_smoothness", config.objective_smoothness},
                      {"epigraph_slack", config.epigraph_slack},
                      {"adaptation",
                       {{"enabled", config.adaptation_enabled},
                        {"growth_factor", config.growth_factor},
                        {"lambda_enabled", config.lambda_adaptation}}},
                      {"max_iterations", config.algo.max_iterations},
                      {"tolerances",
                       {{"sp1", config.algo.sp1_tolerance},
                        {"sp2", config.algo.sp2_tolerance},
                        {"max_dual_iterations", config.algo.max_dual_iterations}}},
                      {"seed", config.seed}};

  const TerminationReport& term = result.report;
  json res;
  res["reason"] = to_string(term.reason);
  res["k_tilde"] = term.k_tilde;
  res["x_tilde"] = vector_to_json(term.x_tilde);
  res["lambda_tilde"] = vector_to_json(term.lambda_tilde);
  res["message"] = term.message;
  res["point_queries"] = result.point_queries;
  res["reformulated"] = result.reformulated;
  res["gamma0"] = result.gamma0;
  res["xi_resolved"] = result.xi_resolved;
  res["effective_dimension"] = result.effective_dimension;
  res["effective_constraints"] = result.effective_constraints;
  res["constant_doubling_events"] = doubling_events;
  res["infeasible_sample_count"] = result.adaptation.smoothness.infeasible_sample_count;
  res["lambda_updates"] = result.adaptation.lambda_updates;
  res["final_L"] = vector_to_json(result.adaptation.smoothness.L);
  res["final_M"] = vector_to_json(result.adaptation.smoothness.M);
  res["wall_time_ms_total"] = wall_total;
  res["trace_rows"] = result.trace.size();
  if (residuals.final_objective) res["final_objective"] = *residuals.final_objective;
  if (residuals.effective) {
    res["eta_kkt_residual"] = residuals.effective->max_residual;
    res["eta_kkt"] = residual_to_json(*residuals.effective);
  }
  if (residuals.physical) res["physical_kkt"] = residual_to_json(*residuals.physical);
  report["result"] = std::move(res);
  report["trace_digest"] = digest_string(trace_digest(result.trace));
  return report;
}

RunConfig config_from_report(const json& report) {
  RunConfig config;
  const json& problem = report.at("problem");
  config.problem_name = problem.at("name").get<std::string>();
  config.seed = problem.at("seed").get<std::uint64_t>();
  config.problem_params.seed = config.seed;
  if (problem.contains("params")) {
    config.problem_params.d = problem.at("params").at("d").get<int>();
    config.problem_params.m = problem.at("params").at("m").get<int>();
  }
  const json& cfg = report.at("config");
  config.algo.eta = cfg.at("eta").get<double>();
  config.algo.mu = cfg.at("mu").get<double>();
  config.algo.lambda_cap = cfg.at("lambda_cap").get<double>();
  config.algo.kappa = cfg.at("kappa").get<double>();
  config.xi_auto = cfg.at("xi_mode").get<std::string>() == "auto";
  if (!config.xi_auto) config.algo.xi = cfg.at("xi").get<double>();
  config.lipschitz = vector_from_json(cfg.at("lipschitz"), "lipschitz");
  config.smoothness = vector_from_json(cfg.at("smoothness"), "smoothness");
  config.objective_lipschitz = cfg.at("objective_lipschitz").get<double>();
  config.objective_smoothness = cfg.at("objective_smoothness").get<double>();
  config.epigraph_slack = cfg.at("epigraph_slack").get<double>();
  config.adaptation_enabled = cfg.at("adaptation").at("enabled").get<bool>();
  config.growth_factor = cfg.at("adaptation").at("growth_factor").get<double>();
  config.lambda_adaptation = cfg.at("adaptation").at("lambda_enabled").get<bool>();
  config.algo.max_iterations = cfg.at("max_iterations").get<int>();
  config.algo.sp1_tolerance = cfg.at("tolerances").at("sp1").get<double>();
  config.algo.sp2_tolerance = cfg.at("tolerances").at("sp2").get<double>();
  config.algo.max_dual_iterations = cfg.at("tolerances").at("max_dual_iterations").get<int>();
  return config;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(root);
}

std::string derived_report_path(const std::string& trace_path) {
  const auto slash = trace_path.find_last_of('/');
  const auto dot = trace_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return trace_path.substr(0, dot) + ".report.json";
  }
  return trace_path + ".report.json";
}

int cmd_run(const std::string& config_path, const CliOverrides& overrides) {
  RunConfig config;
  try {
    config = load_run_config(config_path);
    if (const char* env_seed = std::getenv("SZOQQ_SEED")) {
      std::size_t used = 0;
      const std::string text(env_seed);
      config.seed = std::stoull(text, &used);
      if (used != text.size()) throw ConfigError("SZOQQ_SEED must be a nonnegative integer");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  if (overrides.trace_path) config.trace_path = *overrides.trace_path;
  if (overrides.report_path) config.report_path = *overrides.report_path;
  if (config.report_path.empty()) config.report_path = derived_report_path(config.trace_path);
  config.problem_params.seed = config.seed;

  ProblemHandle handle;
  RunResult result;
  try {
    handle = instantiate(config.problem_name, config.problem_params);
    result = run(*handle.oracle, options_from_config(config), handle.x0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return 1;
  } catch (const OracleQueryError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  }

  const ResidualSummary residuals = summarize_residuals(handle, result);
  try {
    write_trace_csv(config.trace_path, result.trace);
    std::ofstream out(config.report_path);
    if (!out) throw ConfigError("cannot open report file: " + config.report_path);
    out << build_report(config, handle, result, residuals).dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }

  if (!overrides.quiet) {
    std::cout << "problem: " << config.problem_name << "\n"
              << "reason: " << to_string(result.report.reason) << "\n"
              << "k_tilde: " << result.report.k_tilde << "\n"
              << "point_queries: " << result.point_queries << "\n";
    if (residuals.final_objective) {
      std::cout << "final_objective: " << format_double(*residuals.final_objective) << "\n";
    }
    if (residuals.effective) {
      std::cout << "eta_kkt_residual: " << format_double(residuals.effective->max_residual)
                << "\n";
    }
    std::cout << "trace: " << config.trace_path << "\n"
              << "report: " << config.report_path << "\n";
  }

  switch (result.report.reason) {
    case TerminationReason::BothConditionsMet: return 0;
    case TerminationReason::MaxIterations: return 2;
    case TerminationReason::OracleError: return 3;
  }
  return 3;
}

int cmd_verify(const std::string& trace_path, const std::optional<std::string>& report_path,
               const std::optional<std::string>& expected_problem, bool quiet) {
  const std::string resolved_report =
      report_path ? *report_path : derived_report_path(trace_path);

  json report;
  std::vector<IterationRecord> recorded;
  RunConfig config;
  try {
    std::ifstream in(resolved_report);
    if (!in) throw ConfigError("cannot open report file: " + resolved_report);
    report = json::parse(in);
    if (report.value("schema", "") != std::string("szoqq-report-v1")) {
      throw ConfigError("report: unexpected schema");
    }
    config = config_from_report(report);
    recorded = read_trace_csv(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "verify error: " << e.what() << "\n";
    return 1;
  }

  if (expected_problem && *expected_problem != config.problem_name) {
    std::cerr << "verify error: trace/problem mismatch (report says \"" << config.problem_name
              << "\", expected \"" << *expected_problem << "\")\n";
    return 1;
  }

  const std::string recorded_digest = digest_string(trace_digest(recorded));
  const std::string stored_digest = report.value("trace_digest", "");
  if (recorded_digest != stored_digest) {
    std::cerr << "verify error: trace content does not match the recorded digest ("
              << recorded_digest << " vs " << stored_digest << ")\n";
    return 1;
  }

  ProblemHandle handle;
  RunResult result;
  try {
    handle = instantiate(config.problem_name, config.problem_params);
    result = run(*handle.oracle, options_from_config(config), handle.x0);
  } catch (const std::exception& e) {
    std::cerr << "verify error: deterministic replay failed: " << e.what() << "\n";
    return 1;
  }

  const std::string replay_digest = digest_string(trace_digest(result.trace));
  if (replay_digest != recorded_digest) {
    std::cerr << "verify error: replay diverges from the recorded trace (" << replay_digest
              << " vs " << recorded_digest << ")\n";
    return 1;
  }

  // Audit every physical oracle visit against ground truth.
  const GroundTruth& truth = *handle.truth;
  std::int64_t infeasible = 0;
  std::int64_t audited = 0;
  for (const auto& record : handle.oracle->log().snapshot()) {
    ++audited;
    for (int i = 1; i <= truth.constraint_count(); ++i) {
      if (truth.value(record.x, i) > 0.0) {
        ++infeasible;
        break;
      }
    }
  }

  const ResidualSummary residuals = summarize_residuals(handle, result);

  if (!quiet) {
    std::cout << "problem: " << config.problem_name << "\n"
              << "trace_rows: " << recorded.size() << "\n"
              << "trace_digest: " << recorded_digest << "\n"
              << "samples_audited: " << audited << "\n"
              << "infeasible_samples: " << infeasible << "\n";
  }
  if (residuals.effective && !quiet) {
    std::cout << "final_kkt_residual: " << format_double(residuals.effective->max_residual)
              << "\n";
  }
  if (!quiet) {
    std::cout << "verdict: " << (infeasible == 0 ? "clean" : "unsafe") << "\n";
  }
  return infeasible == 0 ? 0 : 1;
}

int cmd_list() {
  for (const auto& info : registry()) {
    std::cout << info.name << " (d=" << info.dimension << ", m=" << info.constraints
              << "): " << info.description << "\n";
  }
  return 0;
}

}  // namespace szoqq
