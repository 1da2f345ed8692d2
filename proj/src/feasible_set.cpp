#include "szoqq/feasible_set.hpp"

#include <cmath>

#include "szoqq/errors.hpp"

namespace szoqq {

namespace {

void check_anchor_values(const Vector& anchor, const Vector& fvals) {
  if (anchor.size() == 0) throw ContractViolation("feasible set: empty anchor");
  for (Eigen::Index i = 0; i < fvals.size(); ++i) {
    if (!(fvals[i] < 0.0)) {
      throw StrictFeasibilityLost("feasible set: anchor is not strictly feasible",
                                  static_cast<int>(i) + 1);
    }
  }
}

double radius_floor(const Vector& anchor) {
  return 1e-12 * std::max(1.0, anchor.norm());
}

}  // namespace

LocalFeasibleSet build_safe_set(const Vector& anchor, const Vector& fvals,
                                const std::vector<GradientEstimate>& gradients,
                                const Vector& M) {
  check_anchor_values(anchor, fvals);
  const auto m = fvals.size();
  if (static_cast<Eigen::Index>(gradients.size()) != m || M.size() != m) {
    throw ContractViolation("build_safe_set: fvals, gradients and M must align");
  }
  LocalFeasibleSet set;
  set.anchor = anchor;
  set.fvals = fvals;
  set.gradients = gradients;
  set.M = M;
  set.balls.reserve(static_cast<std::size_t>(m));
  const double floor = radius_floor(anchor);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(M[i] > 0.0)) throw ContractViolation("build_safe_set: M entries must be > 0");
    const Vector& g = gradients[static_cast<std::size_t>(i)].g;
    if (g.size() != anchor.size()) {
      throw ContractViolation("build_safe_set: gradient dimension mismatch");
    }
    Ball ball;
    ball.center = anchor - g / (2.0 * M[i]);
    const double radicand = -fvals[i] / M[i] + g.squaredNorm() / (4.0 * M[i] * M[i]);
    if (radicand > floor * floor) {
      ball.radius = std::sqrt(radicand);
    } else {
      ball.radius = floor;
      set.clamped.push_back(static_cast<int>(i) + 1);
    }
    set.balls.push_back(std::move(ball));
  }
  return set;
}

LocalFeasibleSet lipschitz_set(const Vector& anchor, const Vector& fvals, const Vector& L) {
  check_anchor_values(anchor, fvals);
  if (L.size() != fvals.size()) {
    throw ContractViolation("lipschitz_set: one L per constraint required");
  }
  LocalFeasibleSet set;
  set.anchor = anchor;
  set.fvals = fvals;
  set.balls.reserve(static_cast<std::size_t>(fvals.size()));
  for (Eigen::Index i = 0; i < fvals.size(); ++i) {
    if (!(L[i] > 0.0)) throw ContractViolation("lipschitz_set: L entries must be > 0");
    set.balls.push_back(Ball{anchor, -fvals[i] / L[i]});
  }
  return set;
}

bool contains(const LocalFeasibleSet& set, const Vector& x) {
  if (x.size() != set.anchor.size()) {
    throw ContractViolation("contains: point dimension mismatch");
  }
  for (const Ball& ball : set.balls) {
    if (!ball.contains(x)) return false;
  }
  return true;
}

bool ball_containment(const Ball& inner, const Ball& outer) {
  if (inner.center.size() != outer.center.size()) {
    throw ContractViolation("ball_containment: dimension mismatch");
  }
  return (inner.center - outer.center).norm() + inner.radius <= outer.radius;
}

}  // namespace szoqq
