// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <utility>

#include "szoqq/feasible_set.hpp"
#include "szoqq/types.hpp"

namespace szoqq {

/// Proximal linear objective over the local quadratic-model set:
///   minimize  c·x + mu·‖x − anchor‖²
///   subject to fvals_i + g_iᵀ(x − anchor) + 2 M_i ‖x − anchor‖² ≤ 0.
struct Sp1Instance {
  Vector c;
  double mu = 0.0;
  Vector anchor;
  const LocalFeasibleSet* set = nullptr;
};

struct SubproblemSolution {
  Vector x;
  Vector lambda;
  double duality_gap = 0.0;           ///< primal minus dual objective, ≥ 0
  double stationarity_residual = 0.0; ///< ‖∇ₓ Lagrangian‖ at (x, lambda)
  int iterations = 0;
};

/// Solves the proximal step by projected gradient ascent on the concave dual
/// (the primal minimizer has a closed form per multiplier). Throws
/// NonConvergence when the dual iteration budget runs out before reaching tol.
SubproblemSolution solve_sp1(const Sp1Instance& instance, double tol,
                             int max_iterations = 10000);

/// Data of the multiplier-certificate subproblem at a candidate pair
/// (x_k, x_next): minimize ‖λ‖∞ subject to λ ≥ 0 and both certificate
/// residuals below eta/2.
struct Sp2Instance {
  Vector grad_f0_next;              ///< ∇f₀(x_next) (linear objective ⇒ exact)
  Vector step;                      ///< x_next − x_k
  std::vector<Vector> gradients;    ///< constraint gradient estimates at x_k
  Vector fvals;                     ///< f_i(x_k)
  Vector M;
  double mu = 0.0;
  double eta = 0.0;
};

struct Sp2Result {
  Vector lambda;
  bool feasible = false;  ///< final λ satisfies both certificate residuals
  int iterations = 0;
};

/// Stationarity residual of the certificate:
///   ‖grad_f0_next + 2 mu·step + Σ λ_i (g_i + 4 M_i step)‖.
double sp2_stationarity(const Sp2Instance& instance, const Vector& lambda);

/// Largest per-constraint complementarity residual of the certificate:
///   max_i |λ_i (fvals_i + g_iᵀ step + 2 M_i ‖step‖²)|.
double sp2_complementarity(const Sp2Instance& instance, const Vector& lambda);

/// Minimizes ‖λ‖∞ over the certificate region by bisection on the cap t,
/// solving a box-constrained least-squares feasibility problem per candidate
/// cap. warm_start must already satisfy the certificate (it brackets the
/// bisection from above); otherwise Sp2WarmStartInvalid is thrown.
Sp2Result solve_sp2(const Sp2Instance& instance, double tol, const Vector& warm_start,
                    int max_inner_iterations = 10000);

}  // namespace szoqq
