#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "support.hpp"
#include "szoqq/errors.hpp"
#include "szoqq/qcqp.hpp"

using namespace szoqq;
using testing::vec;

namespace {

LocalFeasibleSet make_set(const Vector& anchor, const Vector& fvals,
                          const std::vector<Vector>& gradients, const Vector& M) {
  std::vector<GradientEstimate> estimates;
  for (const Vector& g : gradients) {
    GradientEstimate e;
    e.g = g;
    estimates.push_back(e);
  }
  return build_safe_set(anchor, fvals, estimates, M);
}

double sp1_objective(const Sp1Instance& inst, const Vector& x) {
  return inst.c.dot(x) + inst.mu * (x - inst.anchor).squaredNorm();
}

double sp1_model(const LocalFeasibleSet& set, std::size_t i, const Vector& x) {
  const Vector d = x - set.anchor;
  return set.fvals[static_cast<Eigen::Index>(i)] + set.gradients[i].g.dot(d) +
         2.0 * set.M[static_cast<Eigen::Index>(i)] * d.squaredNorm();
}

bool sp1_feasible(const LocalFeasibleSet& set, const Vector& x) {
  for (std::size_t i = 0; i < set.gradients.size(); ++i) {
    if (sp1_model(set, i, x) > 0.0) return false;
  }
  return true;
}

/// Grid minimizer of the proximal objective over the quadratic-model region,
/// refined around the incumbent; supports d <= 2. Each level halves the
/// window around the best node, which keeps the true minimizer inside the
/// next window even when the best node hugs a model boundary.
double sp1_grid_min(const Sp1Instance& inst) {
  const LocalFeasibleSet& set = *inst.set;
  const int d = static_cast<int>(inst.anchor.size());
  REQUIRE(d <= 2);
  double reach = 1e300;
  for (std::size_t i = 0; i < set.gradients.size(); ++i) {
    const double Mi = set.M[static_cast<Eigen::Index>(i)];
    const double shift = set.gradients[i].g.norm() / (4.0 * Mi);
    const double radicand =
        -set.fvals[static_cast<Eigen::Index>(i)] / (2.0 * Mi) + shift * shift;
    reach = std::min(reach, shift + std::sqrt(std::max(radicand, 0.0)));
  }

  Vector center = inst.anchor;  // always a feasible node: fvals < 0 at the anchor
  double span = reach;
  double best = sp1_objective(inst, inst.anchor);
  const int n = 30;
  Vector x(d);
  for (int level = 0; level < 18; ++level) {
    Vector best_x = center;
    double best_here = sp1_objective(inst, center);
    for (int i0 = -n; i0 <= n; ++i0) {
      x[0] = center[0] + span * i0 / n;
      if (d == 1) {
        if (!sp1_feasible(set, x)) continue;
        const double v = sp1_objective(inst, x);
        if (v < best_here) {
          best_here = v;
          best_x = x;
        }
        continue;
      }
      for (int i1 = -n; i1 <= n; ++i1) {
        x[1] = center[1] + span * i1 / n;
        if (!sp1_feasible(set, x)) continue;
        const double v = sp1_objective(inst, x);
        if (v < best_here) {
          best_here = v;
          best_x = x;
        }
      }
    }
    best = std::min(best, best_here);
    center = best_x;
    span /= 2.0;
  }
  return best;
}

double sp1_complementarity(const Sp1Instance& inst, const SubproblemSolution& sol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.set->gradients.size(); ++i) {
    worst = std::max(worst, std::abs(sol.lambda[static_cast<Eigen::Index>(i)] *
                                     sp1_model(*inst.set, i, sol.x)));
  }
  return worst;
}

bool sp2_ok(const Sp2Instance& inst, const Vector& lambda) {
  return sp2_stationarity(inst, lambda) <= inst.eta / 2.0 &&
         sp2_complementarity(inst, lambda) <= inst.eta / 2.0;
}

/// Exact minimum of ‖b + Aλ‖ over a box 0 ≤ λ ≤ upper with at most two
/// coordinates, by direct enumeration: the interior stationary point when
/// the normal matrix is invertible, plus every edge of the box, each a
/// one-dimensional clamped quadratic. A bounded convex quadratic always
/// attains its box minimum at one of these candidates.
double min_residual_over_box(const Vector& b, const Eigen::MatrixXd& A,
                             const Vector& upper) {
  const int m = static_cast<int>(upper.size());
  REQUIRE(m <= 2);
  std::vector<Vector> candidates;
  const auto clamp01 = [](double v, double hi) {
    return std::min(std::max(v, 0.0), hi);
  };
  const auto line_min = [&](int i, const Vector& fixed_part) {
    const double denom = A.col(i).squaredNorm();
    return denom > 0.0 ? -A.col(i).dot(fixed_part) / denom : 0.0;
  };
  if (m == 1) {
    Vector lam(1);
    lam[0] = clamp01(line_min(0, b), upper[0]);
    candidates.push_back(lam);
    lam[0] = 0.0;
    candidates.push_back(lam);
    lam[0] = upper[0];
    candidates.push_back(lam);
  } else {
    const Eigen::MatrixXd H = A.transpose() * A;
    const double det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
    if (std::abs(det) > 1e-12 * (1.0 + H(0, 0)) * (1.0 + H(1, 1))) {
      const Vector rhs = -A.transpose() * b;
      Vector lam(2);
      lam[0] = (H(1, 1) * rhs[0] - H(0, 1) * rhs[1]) / det;
      lam[1] = (H(0, 0) * rhs[1] - H(1, 0) * rhs[0]) / det;
      if (lam[0] >= 0.0 && lam[0] <= upper[0] && lam[1] >= 0.0 &&
          lam[1] <= upper[1]) {
        candidates.push_back(lam);
      }
    }
    for (int fixed = 0; fixed < 2; ++fixed) {
      const int moving = 1 - fixed;
      for (const double bound : {0.0, upper[fixed]}) {
        Vector lam(2);
        lam[fixed] = bound;
        const Vector fixed_part = b + A.col(fixed) * bound;
        lam[moving] = clamp01(line_min(moving, fixed_part), upper[moving]);
        candidates.push_back(lam);
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& lam : candidates) {
    best = std::min(best, (b + A * lam).norm());
  }
  return best;
}

/// Independent reference for the smallest certificate sup-norm (m <= 2):
/// bisection on the level t, where a level is admissible when some multiplier
/// in [0, t]^m, additionally capped so each complementarity product stays
/// within target, brings the stationarity residual within target. The inner
/// minimization is exact, so the reference is accurate to the bisection width.
double sp2_reference_min_inf(const Sp2Instance& inst, const Vector& warm) {
  const int m = static_cast<int>(inst.fvals.size());
  REQUIRE(m <= 2);
  REQUIRE(sp2_ok(inst, warm));
  const double target = inst.eta / 2.0;
  const int d = static_cast<int>(inst.step.size());
  const Vector b = inst.grad_f0_next + 2.0 * inst.mu * inst.step;
  Eigen::MatrixXd A(d, m);
  Vector cap(m);
  for (int i = 0; i < m; ++i) {
    A.col(i) = inst.gradients[static_cast<std::size_t>(i)] +
               4.0 * inst.M[i] * inst.step;
    const double s = inst.fvals[i] +
                     inst.gradients[static_cast<std::size_t>(i)].dot(inst.step) +
                     2.0 * inst.M[i] * inst.step.squaredNorm();
    cap[i] = s == 0.0 ? std::numeric_limits<double>::infinity()
                      : target / std::abs(s);
  }
  if (b.norm() <= target) return 0.0;
  double t_lo = 0.0;
  double t_hi = warm.lpNorm<Eigen::Infinity>();
  while (t_hi - t_lo > 1e-8) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    const Vector upper = cap.cwiseMin(t_mid);
    if (min_residual_over_box(b, A, upper) <= target) {
      t_hi = t_mid;
    } else {
      t_lo = t_mid;
    }
  }
  return t_hi;
}

}  // namespace

TEST_CASE("zero linear cost keeps the proximal step at the anchor") {
  const Vector anchor = vec({0.3, -0.2});
  const LocalFeasibleSet set =
      make_set(anchor, vec({-1.0}), {vec({0.1, 0.2})}, vec({1.0}));
  const Sp1Instance inst{vec({0.0, 0.0}), 1.0, anchor, &set};
  const SubproblemSolution sol = solve_sp1(inst, 1e-10);
  CHECK((sol.x - anchor).norm() <= 1e-8);
  CHECK(sol.lambda.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(sol.duality_gap <= 1e-9);
}

TEST_CASE("inactive region reduces the step to the unconstrained proximal point") {
  const Vector anchor = vec({0.0});
  const LocalFeasibleSet set = make_set(anchor, vec({-200.0}), {vec({0.0})}, vec({1.0}));
  const Sp1Instance inst{vec({1.0}), 1.0, anchor, &set};
  const SubproblemSolution sol = solve_sp1(inst, 1e-10);
  CHECK(sol.x[0] == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(sol.lambda[0] <= 1e-8);
}

TEST_CASE("active region pins the step to the model boundary with its multiplier") {
  // minimize x + 0.001 x^2 subject to -0.02 + 2 x^2 <= 0, i.e. x in [-0.1, 0.1]:
  // solution x = -0.1 with stationarity 1 + 0.002 x + 4 lambda x = 0.
  const Vector anchor = vec({0.0});
  const LocalFeasibleSet set = make_set(anchor, vec({-0.02}), {vec({0.0})}, vec({1.0}));
  const Sp1Instance inst{vec({1.0}), 0.001, anchor, &set};
  const SubproblemSolution sol = solve_sp1(inst, 1e-12, 200000);
  CHECK(sol.x[0] == doctest::Approx(-0.1).epsilon(1e-5));
  CHECK(sol.lambda[0] == doctest::Approx(2.4995).epsilon(1e-3));
  CHECK(sol.duality_gap <= 1e-9);
  CHECK(sp1_complementarity(inst, sol) <= 1e-9);
}

TEST_CASE("proximal step matches a refined grid on random small instances") {
  std::mt19937_64 rng(90217);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int m = 1 + static_cast<int>(rng() % 3);
    Vector anchor(d), c(d);
    for (int r = 0; r < d; ++r) {
      anchor[r] = normal(rng);
      c[r] = normal(rng);
    }
    Vector fvals(m), M(m);
    std::vector<Vector> gradients;
    for (int i = 0; i < m; ++i) {
      fvals[i] = -(0.1 + 1.4 * unif(rng));
      M[i] = 0.5 + 2.5 * unif(rng);
      Vector g(d);
      for (int r = 0; r < d; ++r) g[r] = normal(rng);
      gradients.push_back(g);
    }
    const double mu = 1e-3 + unif(rng);

    const LocalFeasibleSet set = make_set(anchor, fvals, gradients, M);
    const Sp1Instance inst{c, mu, anchor, &set};
    const SubproblemSolution sol = solve_sp1(inst, 1e-11, 500000);

    CAPTURE(trial);
    CHECK(sp1_feasible(set, sol.x));
    CHECK(sol.duality_gap <= 1e-9);
    CHECK(sp1_complementarity(inst, sol) <= 1e-9);
    const double grid = sp1_grid_min(inst);
    CHECK(std::abs(sp1_objective(inst, sol.x) - grid) <= 1e-4);
  }
}

TEST_CASE("dual iteration budget exhaustion is reported") {
  const Vector anchor = vec({0.0});
  const LocalFeasibleSet set = make_set(anchor, vec({-0.02}), {vec({0.0})}, vec({1.0}));
  const Sp1Instance inst{vec({1.0}), 0.001, anchor, &set};
  CHECK_THROWS_AS(solve_sp1(inst, 1e-12, 1), NonConvergence);
}

TEST_CASE("scalar certificate minimizes the multiplier onto the residual boundary") {
  // |1 - lambda| <= 0.1 and |0.05 lambda| <= 0.1: smallest sup-norm is 0.9.
  Sp2Instance inst;
  inst.grad_f0_next = vec({1.0});
  inst.step = vec({0.0});
  inst.gradients = {vec({-1.0})};
  inst.fvals = vec({-0.05});
  inst.M = vec({1.0});
  inst.mu = 0.5;
  inst.eta = 0.2;
  const Sp2Result result = solve_sp2(inst, 1e-9, vec({1.0}));
  REQUIRE(result.feasible);
  CHECK(result.lambda[0] == doctest::Approx(0.9).epsilon(1e-5));
  CHECK(sp2_stationarity(inst, result.lambda) <= inst.eta / 2.0 + 1e-9);
  CHECK(sp2_complementarity(inst, result.lambda) <= inst.eta / 2.0 + 1e-9);
}

TEST_CASE("small stationary residual admits the zero multiplier") {
  Sp2Instance inst;
  inst.grad_f0_next = vec({0.05});
  inst.step = vec({0.0});
  inst.gradients = {vec({-1.0})};
  inst.fvals = vec({-0.05});
  inst.M = vec({1.0});
  inst.mu = 0.5;
  inst.eta = 0.2;
  const Sp2Result result = solve_sp2(inst, 1e-9, vec({0.1}));
  REQUIRE(result.feasible);
  CHECK(result.lambda.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("a warm start outside the certificate region is rejected") {
  Sp2Instance inst;
  inst.grad_f0_next = vec({1.0});
  inst.step = vec({0.0});
  inst.gradients = {vec({-1.0})};
  inst.fvals = vec({-0.05});
  inst.M = vec({1.0});
  inst.mu = 0.5;
  inst.eta = 0.2;
  CHECK_THROWS_AS(solve_sp2(inst, 1e-9, vec({0.0})), Sp2WarmStartInvalid);
}

TEST_CASE("certificate multiplier matches an exact reference on small instances") {
  std::mt19937_64 rng(551177);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 2);

    Sp2Instance inst;
    inst.mu = 0.01;
    inst.eta = 0.5;
    inst.step = Vector::Zero(d);
    for (int r = 0; r < d; ++r) inst.step[r] = 0.02 * normal(rng);
    inst.M = Vector::Zero(m);
    inst.fvals = Vector::Zero(m);
    Vector lambda_true(m);
    for (int i = 0; i < m; ++i) {
      Vector g(d);
      for (int r = 0; r < d; ++r) g[r] = normal(rng);
      inst.gradients.push_back(g);
      inst.M[i] = 0.5 + 1.5 * unif(rng);
      lambda_true[i] = 2.0 * unif(rng);
      // Place the constraint value so the model residual at the step is small.
      inst.fvals[i] = -(1e-3 + 0.05 * unif(rng)) - g.dot(inst.step) -
                      2.0 * inst.M[i] * inst.step.squaredNorm();
    }
    Vector residual(d);
    for (int r = 0; r < d; ++r) residual[r] = normal(rng);
    residual *= (inst.eta / 4.0) * unif(rng) / std::max(residual.norm(), 1e-12);
    inst.grad_f0_next = -2.0 * inst.mu * inst.step + residual;
    for (int i = 0; i < m; ++i) {
      inst.grad_f0_next -= lambda_true[i] * (inst.gradients[i] + 4.0 * inst.M[i] * inst.step);
    }

    REQUIRE(sp2_ok(inst, lambda_true));
    const Sp2Result result = solve_sp2(inst, 1e-9, lambda_true);
    REQUIRE(result.feasible);
    CHECK(sp2_ok(inst, result.lambda));

    const double reference = sp2_reference_min_inf(inst, lambda_true);
    CAPTURE(trial);
    CHECK(std::abs(result.lambda.lpNorm<Eigen::Infinity>() - reference) <= 1e-4);
  }
}
