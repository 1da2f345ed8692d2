#include "szoqq/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "szoqq/errors.hpp"
#include "szoqq/feasible_set.hpp"
#include "szoqq/gradient.hpp"
#include "szoqq/qcqp.hpp"

namespace szoqq {

AdaptationState adapt_constants(const AdaptationState& state) {
  AdaptationState next = state;
  next.smoothness.L *= state.smoothness.growth_factor;
  next.smoothness.M *= state.smoothness.growth_factor;
  next.smoothness.infeasible_sample_count = state.smoothness.infeasible_sample_count + 1;
  return next;
}

double threshold_xi(double eta, double Lambda, double mu, const Vector& L,
                    const Vector& M, int dimension, int m) {
  if (!(eta > 0.0)) throw ContractViolation("threshold_xi: eta must be > 0");
  if (!(Lambda > 0.0)) throw ContractViolation("threshold_xi: Lambda must be > 0");
  if (!(mu > 0.0)) throw ContractViolation("threshold_xi: mu must be > 0");
  if (dimension < 1) throw ContractViolation("threshold_xi: dimension must be >= 1");
  if (m < 1 || L.size() != m || M.size() != m) {
    throw ContractViolation("threshold_xi: need one L and M entry per constraint");
  }
  for (int i = 0; i < m; ++i) {
    if (!(L[i] > 0.0) || !(M[i] > 0.0)) {
      throw ContractViolation("threshold_xi: L and M entries must be > 0");
    }
  }
  const double L_max = L.maxCoeff();
  const double M_max = M.maxCoeff();
  const double alpha_max = gradient_error_coefficient(dimension, M_max);
  const double by_sum = eta / (60.0 * Lambda * M.sum());
  const double by_prox = eta / (12.0 * mu);
  const double by_curvature = eta / (4.0 * Lambda * (alpha_max + 2.0 * L_max + 2.0 * M_max));
  return std::min({by_sum, by_prox, 1.0, by_curvature});
}

double iteration_bound(double f0_at_x0, double f0_inf, double mu, double h_eta) {
  if (!(mu > 0.0)) throw ContractViolation("iteration_bound: mu must be > 0");
  if (!(h_eta > 0.0)) throw ContractViolation("iteration_bound: h_eta must be > 0");
  if (f0_at_x0 < f0_inf) {
    throw ContractViolation("iteration_bound: start value below the infimum");
  }
  return (f0_at_x0 - f0_inf) / (mu * h_eta * h_eta);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

RunResult run(ProblemOracle& oracle, const RunOptions& options, const Vector& x0) {
  options.algo.validate();
  const int m_orig = oracle.constraint_count();
  if (options.L.size() != m_orig || options.M.size() != m_orig) {
    throw ContractViolation("run: one L and M entry per constraint required");
  }
  if (x0.size() != oracle.dimension()) {
    throw ContractViolation("run: start point dimension mismatch");
  }

  RunResult result;

  // Assemble the effective problem: lift unknown objectives to epigraph form.
  ProblemOracle* eff = &oracle;
  EpigraphOracle lifted;
  Vector x;
  Vector L_eff;
  Vector M_eff;
  if (!oracle.known_objective()) {
    if (!(options.objective_lipschitz > 0.0) || !(options.objective_smoothness > 0.0)) {
      throw ContractViolation("run: unknown objective requires positive objective bounds");
    }
    if (!(options.epigraph_slack > 0.0)) {
      throw ContractViolation("run: epigraph_slack must be > 0");
    }
    const double f00 = oracle.query(x0, 0);
    lifted = epigraph_reformulate(oracle, options.objective_lipschitz,
                                  options.objective_smoothness);
    eff = lifted.oracle.get();
    result.reformulated = true;
    result.gamma0 = f00 + options.epigraph_slack;
    x.resize(x0.size() + 1);
    x << x0, result.gamma0;
    L_eff.resize(m_orig + 1);
    L_eff << lifted.first_constraint_L, options.L;
    M_eff.resize(m_orig + 1);
    M_eff << lifted.first_constraint_M, options.M;
    const auto probe_log = oracle.log().snapshot();
    result.objective_probe = probe_log.back();
  } else {
    x = x0;
    L_eff = options.L;
    M_eff = options.M;
  }

  const int d = eff->dimension();
  const int m = eff->constraint_count();
  result.effective_dimension = d;
  result.effective_constraints = m;
  result.effective_L_initial = L_eff;
  result.effective_M_initial = M_eff;

  AdaptationState state;
  state.smoothness = SmoothnessParams{L_eff, M_eff, options.growth_factor, 0};
  state.smoothness.validate();
  state.lambda_current = options.algo.lambda_cap;
  state.last_feasible_iterate = x;

  const KnownLinearObjective objective = *eff->known_objective();
  const AlgorithmConfig& algo = options.algo;
  const double xi = algo.xi ? *algo.xi
                            : threshold_xi(algo.eta, state.lambda_current, algo.mu, L_eff,
                                           M_eff, d, m);
  result.xi_resolved = xi;

  auto physical_queries = [&]() {
    return result.reformulated ? oracle.point_queries() : eff->point_queries();
  };

  TerminationReport report;
  report.reason = TerminationReason::MaxIterations;
  Vector last_lambda = Vector::Zero(m);
  const double sqrt_d = std::sqrt(static_cast<double>(d));

  int k = 0;
  bool stop = false;
  while (!stop) {
    if (k >= algo.max_iterations) {
      report.x_tilde = x;
      report.lambda_tilde = last_lambda;
      report.k_tilde = k;
      report.reason = TerminationReason::MaxIterations;
      report.message = "iteration budget exhausted";
      break;
    }
    const auto pass_start = Clock::now();
    const double oracle_seconds_before = eff->query_seconds();
    eff->set_iteration_tag(k);
    IterationRecord rec;
    rec.k = k;
    rec.x = x;

    try {
      const Vector values = eff->query_all(x);
      rec.f0 = values[0];

      int violated = -1;
      for (int i = 1; i <= m; ++i) {
        if (values[i] > 0.0) {
          violated = i;
          break;
        }
      }
      double l_star = 0.0;
      if (violated == -1) {
        try {
          l_star = safe_radius(values.tail(m), state.smoothness.L_max());
        } catch (const StrictFeasibilityLost& e) {
          violated = e.constraint();  // boundary-exact value; same recovery path
        }
      }

      if (violated != -1) {
        if (k == 0) {
          char detail[64];
          std::snprintf(detail, sizeof(detail), "(constraint %d, value %.3g)", violated,
                        values[violated]);
          throw ContractViolation(std::string("run: initial point is not strictly feasible ") +
                                  detail);
        }
        if (!options.constant_adaptation) {
          throw NonConvergence("run: infeasible iterate with constant adaptation disabled", k);
        }
        state = adapt_constants(state);
        rec.events.push_back("constant-doubling");
        x = state.last_feasible_iterate;
      } else {
        state.last_feasible_iterate = x;
        const Vector fvals = values.tail(m);
        const double nu =
            k == 0 ? l_star / sqrt_d
                   : step_size(l_star, k, algo.eta,
                               gradient_error_coefficient(d, state.smoothness.M_max()), m,
                               state.lambda_current, d);
        rec.nu = nu;
        SweepResult sweep = estimate_all_gradients(*eff, x, values, nu, state.smoothness.M);
        if (!sweep.infeasible.empty()) {
          if (!options.constant_adaptation) {
            throw NonConvergence("run: infeasible sample with constant adaptation disabled",
                                 k);
          }
          for (std::size_t s = 0; s < sweep.infeasible.size(); ++s) {
            state = adapt_constants(state);
            rec.events.push_back("constant-doubling");
          }
          x = state.last_feasible_iterate;
        } else {
          LocalFeasibleSet set = build_safe_set(x, fvals, sweep.estimates, state.smoothness.M);
          if (!set.clamped.empty()) {
            rec.events.push_back("radius-clamp");
          }
          const Sp1Instance sp1_instance{objective.c, algo.mu, x, &set};
          SubproblemSolution sol =
              solve_sp1(sp1_instance, algo.sp1_tolerance, algo.max_dual_iterations);
          last_lambda = sol.lambda;
          const Vector step_vec = sol.x - x;
          const double step_norm = step_vec.norm();
          rec.step_norm = step_norm;

          if (step_norm <= xi) {
            Sp2Instance sp2_instance;
            sp2_instance.grad_f0_next = objective.c;
            sp2_instance.step = step_vec;
            sp2_instance.gradients.reserve(static_cast<std::size_t>(m));
            for (const auto& est : sweep.estimates) sp2_instance.gradients.push_back(est.g);
            sp2_instance.fvals = fvals;
            sp2_instance.M = state.smoothness.M;
            sp2_instance.mu = algo.mu;
            sp2_instance.eta = algo.eta;
            Sp2Result cert = solve_sp2(sp2_instance, algo.sp2_tolerance, sol.lambda,
                                       algo.max_dual_iterations);
            if (!cert.feasible) {
              throw NonConvergence("run: certificate subproblem failed", cert.iterations);
            }
            const double lambda_inf =
                cert.lambda.size() > 0 ? cert.lambda.cwiseAbs().maxCoeff() : 0.0;
            rec.lambda_inf = lambda_inf;
            rec.delta1 = sp2_stationarity(sp2_instance, cert.lambda);
            rec.delta2_max = sp2_complementarity(sp2_instance, cert.lambda);
            if (lambda_inf <= 2.0 * state.lambda_current) {
              report.x_tilde = sol.x;
              report.lambda_tilde = cert.lambda;
              report.k_tilde = k + 1;
              report.reason = TerminationReason::BothConditionsMet;
              stop = true;
            } else if (options.lambda_adaptation) {
              state.lambda_current = algo.kappa * lambda_inf;
              ++state.lambda_updates;
              rec.events.push_back("lambda-update");
            }
          }
          x = sol.x;
        }
      }
    } catch (const OracleQueryError& e) {
      report.x_tilde = x;
      report.lambda_tilde = Vector::Zero(m);
      report.k_tilde = k;
      report.reason = TerminationReason::OracleError;
      report.message = e.what();
      stop = true;
    } catch (const NonConvergence& e) {
      report.x_tilde = x;
      report.lambda_tilde = Vector::Zero(m);
      report.k_tilde = k;
      report.reason = TerminationReason::OracleError;
      report.message = e.what();
      stop = true;
    } catch (const Sp2WarmStartInvalid& e) {
      report.x_tilde = x;
      report.lambda_tilde = Vector::Zero(m);
      report.k_tilde = k;
      report.reason = TerminationReason::OracleError;
      report.message = e.what();
      stop = true;
    }

    rec.samples_cumulative = physical_queries();
    const double oracle_ms = (eff->query_seconds() - oracle_seconds_before) * 1000.0;
    rec.wall_time_ms = std::max(0.0, elapsed_ms(pass_start) - oracle_ms);
    result.trace.push_back(std::move(rec));
    ++k;
  }

  result.report = std::move(report);
  result.adaptation = std::move(state);
  result.point_queries = physical_queries();
  result.samples = eff->log().snapshot();
  return result;
}

}  // namespace szoqq
