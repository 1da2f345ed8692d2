// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <vector>

#include "szoqq/gradient.hpp"
#include "szoqq/types.hpp"

namespace szoqq {

/// Closed Euclidean ball.
struct Ball {
  Vector center;
  double radius = 0.0;

  bool contains(const Vector& x) const { return (x - center).norm() <= radius; }
};

/// Inner approximation of the feasible region built from one anchor:
/// the intersection of per-constraint balls, together with the raw data
/// (values, gradient estimates, smoothness bounds) the subproblem solvers
/// consume directly.
struct LocalFeasibleSet {
  Vector anchor;
  Vector fvals;                             ///< f_i(anchor), strictly negative
  std::vector<GradientEstimate> gradients;  ///< empty for Lipschitz-only sets
  Vector M;                                 ///< empty for Lipschitz-only sets
  std::vector<Ball> balls;                  ///< one per constraint
  std::vector<int> clamped;                 ///< constraints whose radius hit the floor
};

/// Quadratic-model set from curvature bounds. Ball i has
/// center anchor − g_i/(2 M_i) and radius² = −fvals_i/M_i + ‖g_i‖²/(4 M_i²).
/// A degenerate radicand is clamped to a floor of 1e-12·max(1, ‖anchor‖)
/// and the constraint index recorded in `clamped`.
LocalFeasibleSet build_safe_set(const Vector& anchor, const Vector& fvals,
                                const std::vector<GradientEstimate>& gradients,
                                const Vector& M);

/// Zeroth-order Lipschitz set: ball i has center anchor and radius −fvals_i/L_i.
LocalFeasibleSet lipschitz_set(const Vector& anchor, const Vector& fvals, const Vector& L);

/// Membership in the intersection of the balls (closed; boundary included).
bool contains(const LocalFeasibleSet& set, const Vector& x);

/// Whether `inner` lies entirely within `outer`:
/// ‖c_in − c_out‖ + r_in ≤ r_out.
bool ball_containment(const Ball& inner, const Ball& outer);

}  // namespace szoqq
