// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "szoqq/oracle.hpp"
#include "szoqq/types.hpp"

namespace szoqq {

/// One row of the run trace. Optional fields stay empty when the quantity was
/// never computed in that iteration (aborted sweep, no certificate attempt).
struct IterationRecord {
  int k = 0;
  Vector x;  ///< iterate the iteration started from (in-memory only)
  double f0 = 0.0;
  std::optional<double> step_norm;
  std::optional<double> nu;
  std::optional<double> lambda_inf;
  std::optional<double> delta1;
  std::optional<double> delta2_max;
  std::int64_t samples_cumulative = 0;
  double wall_time_ms = 0.0;
  std::vector<std::string> events;
};

/// Mutable safety state threaded through a run.
struct AdaptationState {
  SmoothnessParams smoothness;
  double lambda_current = 0.0;  ///< active dual bound Λ
  int lambda_updates = 0;
  Vector last_feasible_iterate;
};

/// Grows every L_i and M_i by the growth factor in response to one infeasible
/// sample, bumps the sample count, and resets the suggested iterate to the
/// last feasible one.
AdaptationState adapt_constants(const AdaptationState& state);

/// Step-norm termination threshold h(eta):
/// min{ eta/(60·Lambda·ΣM_i), eta/(12·mu), 1, eta/(4·Lambda·(alpha_max + 2·L_max + 2·M_max)) }
/// with alpha_max = √d · M_max / 2.
double threshold_xi(double eta, double Lambda, double mu, const Vector& L,
                    const Vector& M, int dimension, int m);

/// Worst-case iteration count (f0_at_x0 − f0_inf) / (mu · h(eta)²).
double iteration_bound(double f0_at_x0, double f0_inf, double mu, double h_eta);

/// Everything driver::run needs beyond the oracle and the start point.
struct RunOptions {
  AlgorithmConfig algo;
  Vector L;  ///< per original constraint
  Vector M;
  double growth_factor = 2.0;
  bool constant_adaptation = true;  ///< grow L, M on infeasible samples
  bool lambda_adaptation = true;    ///< grow Λ when the certificate bound fails
  double objective_lipschitz = 0.0; ///< used only when the objective is unknown
  double objective_smoothness = 0.0;
  double epigraph_slack = 1.0;      ///< γ₀ − f₀(x₀) for the reformulated start
};

struct RunResult {
  TerminationReport report;
  std::vector<IterationRecord> trace;
  AdaptationState adaptation;  ///< final state
  std::int64_t point_queries = 0;
  std::vector<SampleRecord> samples;            ///< effective-problem query log
  std::optional<SampleRecord> objective_probe;  ///< pre-loop f₀(x₀) visit, if any
  bool reformulated = false;
  double gamma0 = 0.0;       ///< initial epigraph level (reformulated runs)
  double xi_resolved = 0.0;  ///< threshold actually used
  int effective_dimension = 0;
  int effective_constraints = 0;
  Vector effective_L_initial;  ///< constants the run started with
  Vector effective_M_initial;
};

/// Runs the full safe zeroth-order loop from the strictly feasible x0.
/// Unknown objectives are lifted to the epigraph form internally; x0 keeps
/// the original dimension either way.
RunResult run(ProblemOracle& oracle, const RunOptions& options, const Vector& x0);

}  // namespace szoqq
