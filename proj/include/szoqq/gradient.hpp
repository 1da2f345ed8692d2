// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "szoqq/oracle.hpp"
#include "szoqq/types.hpp"

namespace szoqq {

/// Forward-difference gradient of one constraint plus its a-priori error bound.
struct GradientEstimate {
  Vector g;
  double nu = 0.0;           ///< finite-difference step used
  double error_bound = 0.0;  ///< (√d · M_i / 2) · nu
  int samples_used = 0;      ///< d + 1 point visits (base value shared)
};

/// Error-bound coefficient of the forward-difference estimator: √d · M / 2.
inline double gradient_error_coefficient(int dimension, double M) {
  return std::sqrt(static_cast<double>(dimension)) * M / 2.0;
}

/// Largest radius around the current anchor that the Lipschitz bounds certify
/// as feasible: min_i −fvals_i / L_max. All fvals must be strictly negative.
/// Throws StrictFeasibilityLost otherwise.
double safe_radius(const Vector& fvals, double L_max);

/// Finite-difference step for iteration k ≥ 1:
/// min{ l_star/√d, 1/k, eta / (12 · alpha_max · m · Lambda) }.
/// Iteration 0 uses l_star/√d alone (see the driver).
double step_size(double l_star, int k, double eta, double alpha_max, int m,
                 double Lambda, int dimension);

/// Forward-difference gradient of constraint `index` at x. Performs d+1 point
/// queries (base value plus one per coordinate).
GradientEstimate estimate_gradient(ProblemOracle& oracle, const Vector& x, int index,
                                   double nu, double M_i);

/// A perturbed point that violated some constraint during a sweep.
struct InfeasibleSample {
  Vector x;
  int constraint = 0;  ///< 1-based constraint index
  double value = 0.0;
};

/// One full coordinate sweep shared by all constraints: d point queries on
/// top of the supplied base values. Infeasible perturbed points are recorded
/// but do not stop the sweep; when any are present the estimates must be
/// discarded by the caller.
struct SweepResult {
  std::vector<GradientEstimate> estimates;  ///< one per constraint
  std::vector<InfeasibleSample> infeasible; ///< empty on a clean sweep
};

SweepResult estimate_all_gradients(ProblemOracle& oracle, const Vector& x,
                                   const Vector& base_values, double nu,
                                   const Vector& M);

}  // namespace szoqq
