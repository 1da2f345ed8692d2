#include "szoqq/qcqp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "szoqq/errors.hpp"

namespace szoqq {

namespace {

struct Sp1Data {
  Vector c;
  double mu = 0.0;
  Vector anchor;
  Vector fv;
  Eigen::MatrixXd G;  ///< d × m, column i = gradient estimate of constraint i
  Vector M;
  int d = 0;
  int m = 0;
};

Sp1Data unpack(const Sp1Instance& instance) {
  if (instance.set == nullptr) throw ContractViolation("solve_sp1: missing feasible set");
  const LocalFeasibleSet& set = *instance.set;
  Sp1Data data;
  data.d = static_cast<int>(instance.anchor.size());
  data.m = static_cast<int>(set.fvals.size());
  if (data.d <= 0 || data.m <= 0) throw ContractViolation("solve_sp1: empty instance");
  if (instance.c.size() != data.d || set.anchor.size() != data.d) {
    throw ContractViolation("solve_sp1: dimension mismatch");
  }
  if (static_cast<int>(set.gradients.size()) != data.m || set.M.size() != data.m) {
    throw ContractViolation("solve_sp1: constraint data mismatch");
  }
  if (!(instance.mu > 0.0)) throw ContractViolation("solve_sp1: mu must be > 0");
  data.c = instance.c;
  data.mu = instance.mu;
  data.anchor = instance.anchor;
  data.fv = set.fvals;
  data.M = set.M;
  data.G.resize(data.d, data.m);
  for (int i = 0; i < data.m; ++i) {
    if (set.gradients[static_cast<std::size_t>(i)].g.size() != data.d) {
      throw ContractViolation("solve_sp1: gradient dimension mismatch");
    }
    data.G.col(i) = set.gradients[static_cast<std::size_t>(i)].g;
  }
  for (int i = 0; i < data.m; ++i) {
    if (!(data.fv[i] < 0.0)) {
      throw ContractViolation("solve_sp1: anchor must be strictly inside the set");
    }
    if (!(data.M[i] > 0.0)) throw ContractViolation("solve_sp1: M entries must be > 0");
  }
  return data;
}

struct DualEval {
  Vector z;      ///< x(λ) − anchor
  Vector q;      ///< quadratic-model constraint values at x(λ)
  double value;  ///< dual objective
};

/// The inner minimization has the closed form z = −(c + Gλ) / (2(μ + 2 M·λ));
/// the dual gradient is the constraint-value vector q at that point.
DualEval eval_dual(const Sp1Data& data, const Vector& lambda) {
  DualEval out;
  const Vector v = data.c + data.G * lambda;
  const double s = data.mu + 2.0 * data.M.dot(lambda);
  out.z = -v / (2.0 * s);
  const double zz = out.z.squaredNorm();
  out.q = data.fv + data.G.transpose() * out.z + 2.0 * zz * data.M;
  out.value = data.c.dot(out.z) + data.mu * zz + lambda.dot(out.q);
  return out;
}

double primal_objective(const Sp1Data& data, const Vector& z) {
  return data.c.dot(z) + data.mu * z.squaredNorm();
}

Vector model_values(const Sp1Data& data, const Vector& z) {
  return data.fv + data.G.transpose() * z + 2.0 * z.squaredNorm() * data.M;
}

/// Replaces z with the fixed point of z ↦ (anchor + z) − anchor in double
/// arithmetic, so that rebuilding the displacement from the reported point
/// x = anchor + z reproduces it bit for bit.
Vector round_trip(const Vector& anchor, Vector z) {
  for (int pass = 0; pass < 4; ++pass) {
    Vector zr = anchor + z;
    zr -= anchor;
    if ((zr - z).cwiseAbs().maxCoeff() == 0.0) break;
    z = std::move(zr);
  }
  return z;
}

/// Scales z toward the anchor until every quadratic-model constraint is
/// nonpositive with a small margin, evaluated at the round-tripped
/// displacement so the guarantee survives reporting x = anchor + z. The
/// backoff below the boundary-crossing scale stays tiny so a near-optimal
/// point keeps a near-optimal objective value; the anchor itself (z = 0) is
/// strictly inside and serves as the fallback.
Vector pull_inside(const Sp1Data& data, const Vector& z) {
  // Margins are capped by half the anchor slack so z = 0 always qualifies.
  Vector margin(data.m);
  for (int i = 0; i < data.m; ++i) {
    margin[i] = std::min(1e-14 * (1.0 + std::abs(data.fv[i])),
                         0.5 * std::abs(data.fv[i]));
  }
  const auto inside = [&](const Vector& displacement) {
    return ((model_values(data, displacement) + margin).array() <= 0.0).all();
  };
  Vector settled = round_trip(data.anchor, z);
  if (inside(settled)) return settled;

  // Solve the margined model quadratics for the largest admissible scale, so
  // the shrink matches the geometry instead of a fixed factor.
  const Vector q = model_values(data, z);
  double rho = 1.0;
  for (int i = 0; i < data.m; ++i) {
    if (q[i] <= -margin[i]) continue;
    const double a = 2.0 * data.M[i] * z.squaredNorm();
    const double b = data.G.col(i).dot(z);
    const double c = data.fv[i] + margin[i];  // stays negative by the cap
    double root;
    if (a > 0.0) {
      root = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
    } else {
      root = b > 0.0 ? -c / b : 1.0;
    }
    rho = std::min(rho, root);
  }
  rho = std::min(rho, 1.0);
  settled = round_trip(data.anchor, rho * z);
  bool ok = inside(settled);
  // Doubling backoff absorbs rounding at any scale; it bottoms out at z = 0,
  // which the margin cap keeps admissible.
  double backoff = 1e-13;
  for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
    rho *= std::max(0.0, 1.0 - backoff);
    backoff *= 2.0;
    settled = round_trip(data.anchor, rho * z);
    ok = inside(settled);
  }
  if (!ok) settled.setZero();
  return settled;
}

struct OptimalityCheck {
  Vector z_inside;
  double gap = 0.0;
  double comp = 0.0;
  bool pass = false;
};

OptimalityCheck check_optimality(const Sp1Data& data, const Vector& lambda,
                                 const DualEval& cur, double tol) {
  OptimalityCheck out;
  out.z_inside = pull_inside(data, cur.z);
  out.gap = primal_objective(data, out.z_inside) - cur.value;
  const Vector q = model_values(data, out.z_inside);
  out.comp = (lambda.array() * q.array()).abs().maxCoeff();
  out.pass = out.gap <= tol && out.comp <= tol;
  return out;
}

struct AscentStep {
  bool moved = false;
  Vector lambda;
  DualEval eval;
};

/// One projected gradient ascent step from `base` with backtracking on the
/// curvature estimate `lip`. A step is accepted only when the quadratic upper
/// model at `lip` holds, so an accepted step never lowers the dual value.
AscentStep ascend(const Sp1Data& data, const Vector& base, const DualEval& at,
                  double& lip) {
  AscentStep out;
  for (int attempt = 0; attempt < 80; ++attempt) {
    Vector cand = (base + at.q / lip).cwiseMax(0.0);
    const Vector diff = cand - base;
    const double norm2 = diff.squaredNorm();
    if (norm2 == 0.0) return out;  // projected gradient vanished
    DualEval ec = eval_dual(data, cand);
    if (ec.value >= at.value + at.q.dot(diff) - 0.5 * lip * norm2) {
      out.moved = true;
      out.lambda = std::move(cand);
      out.eval = std::move(ec);
      return out;
    }
    lip *= 2.0;
  }
  return out;
}

/// Newton refinement of the stationarity + active-constraint system on the
/// working set implied by the current multipliers. Accepts only when the
/// refined pair is primal feasible with nonnegative multipliers and does not
/// lower the dual value; on success the duality gap is at rounding level.
bool polish_working_set(const Sp1Data& data, Vector& lambda, DualEval& cur) {
  const double lam_scale = std::max(1.0, lambda.lpNorm<Eigen::Infinity>());
  const double feas_slack = 1e-11 * std::max(1.0, data.fv.cwiseAbs().maxCoeff());
  const double value_slack = 1e-12 * (1.0 + std::abs(cur.value));
  std::vector<int> act;
  std::vector<char> member(static_cast<std::size_t>(data.m), 0);
  for (int i = 0; i < data.m; ++i) {
    if (lambda[i] > 1e-10 * lam_scale) {
      act.push_back(i);
      member[static_cast<std::size_t>(i)] = 1;
    }
  }
  const int a = static_cast<int>(act.size());

  if (a == 0) {
    const Vector z = -data.c / (2.0 * data.mu);
    if (!(model_values(data, z).array() <= feas_slack).all()) return false;
    Vector zero = Vector::Zero(data.m);
    DualEval cand = eval_dual(data, zero);
    if (cand.value < cur.value - value_slack) return false;
    lambda = std::move(zero);
    cur = std::move(cand);
    return true;
  }

  Vector z = cur.z;
  Vector u(a);
  for (int j = 0; j < a; ++j) u[j] = lambda[act[static_cast<std::size_t>(j)]];

  const int n = data.d + a;
  const double ref = std::max({1.0, data.c.lpNorm<Eigen::Infinity>(),
                               data.fv.cwiseAbs().maxCoeff()});
  const double z_guard = 1e6 * (1.0 + cur.z.norm());
  bool solved = false;
  for (int it = 0; it < 40; ++it) {
    double s = data.mu;
    for (int j = 0; j < a; ++j) s += 2.0 * data.M[act[static_cast<std::size_t>(j)]] * u[j];
    if (!(s > 0.0)) return false;
    Vector F(n);
    Vector f1 = data.c + 2.0 * s * z;
    for (int j = 0; j < a; ++j) f1 += u[j] * data.G.col(act[static_cast<std::size_t>(j)]);
    F.head(data.d) = f1;
    const double zz = z.squaredNorm();
    for (int j = 0; j < a; ++j) {
      const int i = act[static_cast<std::size_t>(j)];
      F[data.d + j] = data.fv[i] + data.G.col(i).dot(z) + 2.0 * data.M[i] * zz;
    }
    if (F.lpNorm<Eigen::Infinity>() <= 1e-13 * ref) {
      solved = true;
      break;
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.topLeftCorner(data.d, data.d) =
        2.0 * s * Eigen::MatrixXd::Identity(data.d, data.d);
    for (int j = 0; j < a; ++j) {
      const int i = act[static_cast<std::size_t>(j)];
      const Vector col = data.G.col(i) + 4.0 * data.M[i] * z;
      J.block(0, data.d + j, data.d, 1) = col;
      J.block(data.d + j, 0, 1, data.d) = col.transpose();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) return false;
    const Vector delta = lu.solve(-F);
    if (!delta.allFinite()) return false;
    z += delta.head(data.d);
    u += delta.tail(a);
    if (!z.allFinite() || z.norm() > z_guard) return false;
  }
  if (!solved) return false;

  for (int j = 0; j < a; ++j) {
    if (u[j] < -1e-10 * lam_scale) return false;  // wrong working set
    if (u[j] < 0.0) u[j] = 0.0;
  }
  Vector lambda_new = Vector::Zero(data.m);
  for (int j = 0; j < a; ++j) lambda_new[act[static_cast<std::size_t>(j)]] = u[j];
  const Vector q = model_values(data, z);
  for (int i = 0; i < data.m; ++i) {
    if (!member[static_cast<std::size_t>(i)] && q[i] > feas_slack) return false;
  }
  DualEval cand = eval_dual(data, lambda_new);
  if (cand.value < cur.value - value_slack) return false;
  lambda = std::move(lambda_new);
  cur = std::move(cand);
  return true;
}

}  // namespace

SubproblemSolution solve_sp1(const Sp1Instance& instance, double tol, int max_iterations) {
  if (!(tol > 0.0)) throw ContractViolation("solve_sp1: tol must be > 0");
  const Sp1Data data = unpack(instance);

  Vector lambda = Vector::Zero(data.m);
  Vector lambda_prev = lambda;
  DualEval cur = eval_dual(data, lambda);
  double momentum = 1.0;
  double lip = 1.0;
  int iterations = 0;
  bool converged = false;
  OptimalityCheck check;

  while (iterations < max_iterations) {
    ++iterations;
    check = check_optimality(data, lambda, cur, tol);
    if (check.pass) {
      converged = true;
      break;
    }
    if (iterations % 20 == 0 && polish_working_set(data, lambda, cur)) {
      lambda_prev = lambda;
      momentum = 1.0;
      continue;  // the refined pair is re-examined at the top of the loop
    }

    // Accelerated projected gradient ascent with a monotone restart: if the
    // extrapolated step stalls or loses dual value, retry without momentum.
    const double next_momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_momentum;
    const Vector y = (lambda + beta * (lambda - lambda_prev)).cwiseMax(0.0);
    const bool extrapolated = (y - lambda).cwiseAbs().maxCoeff() != 0.0;
    const DualEval ey = extrapolated ? eval_dual(data, y) : cur;

    AscentStep step = ascend(data, y, ey, lip);
    bool restarted = false;
    if (!step.moved || step.eval.value < cur.value) {
      momentum = 1.0;
      restarted = true;
      if (extrapolated || !step.moved) {
        step = ascend(data, lambda, cur, lip);
      }
      if (!step.moved) {
        break;  // dual stationary point; the closing check decides the outcome
      }
    }
    lambda_prev = lambda;
    lambda = std::move(step.lambda);
    cur = std::move(step.eval);
    if (!restarted) momentum = next_momentum;
    lip = std::max(1e-12, lip * 0.95);
  }

  if (!converged) {
    check = check_optimality(data, lambda, cur, tol);
    if (!check.pass) {
      throw NonConvergence("solve_sp1: dual iteration budget exhausted", iterations);
    }
  }

  SubproblemSolution solution;
  solution.x = instance.anchor + check.z_inside;
  solution.lambda = lambda;
  solution.duality_gap = std::max(0.0, check.gap);
  const double s = data.mu + 2.0 * data.M.dot(lambda);
  solution.stationarity_residual =
      ((data.c + data.G * lambda) + 2.0 * s * check.z_inside).norm();
  solution.iterations = iterations;
  return solution;
}

namespace {

struct Sp2Data {
  Vector b;           ///< grad_f0_next + 2 mu step
  Eigen::MatrixXd A;  ///< d × m, column i = g_i + 4 M_i step
  Vector s;           ///< per-constraint complementarity coefficients
  double eta = 0.0;
  int m = 0;
};

Sp2Data unpack(const Sp2Instance& instance) {
  Sp2Data data;
  const int d = static_cast<int>(instance.step.size());
  data.m = static_cast<int>(instance.fvals.size());
  if (d <= 0 || data.m <= 0) throw ContractViolation("solve_sp2: empty instance");
  if (instance.grad_f0_next.size() != d) {
    throw ContractViolation("solve_sp2: gradient dimension mismatch");
  }
  if (static_cast<int>(instance.gradients.size()) != data.m ||
      instance.M.size() != data.m) {
    throw ContractViolation("solve_sp2: constraint data mismatch");
  }
  if (!(instance.eta > 0.0)) throw ContractViolation("solve_sp2: eta must be > 0");
  data.eta = instance.eta;
  data.b = instance.grad_f0_next + 2.0 * instance.mu * instance.step;
  data.A.resize(d, data.m);
  const double step2 = instance.step.squaredNorm();
  data.s.resize(data.m);
  for (int i = 0; i < data.m; ++i) {
    const Vector& g = instance.gradients[static_cast<std::size_t>(i)];
    if (g.size() != d) throw ContractViolation("solve_sp2: gradient dimension mismatch");
    data.A.col(i) = g + 4.0 * instance.M[i] * instance.step;
    data.s[i] = instance.fvals[i] + g.dot(instance.step) + 2.0 * instance.M[i] * step2;
  }
  return data;
}

struct BoxLsResult {
  Vector lambda;
  double residual = 0.0;
  int iterations = 0;
};

/// Minimizes ‖b + Aλ‖² over the box 0 ≤ λ ≤ upper. Accelerated projected
/// gradient with periodic exact minimization over the working face; the face
/// solves drive the attainable residual to rounding level, which keeps the
/// feasible/infeasible classification of the surrounding bisection sharp.
/// Stops once the residual meets `target`, the iterate is stationary, or the
/// budget runs out.
BoxLsResult box_least_squares(const Sp2Data& data, const Eigen::MatrixXd& H,
                              const Vector& h, double lip, const Vector& upper,
                              const Vector& start, double target,
                              int max_iterations) {
  BoxLsResult out;
  Vector lambda = start.cwiseMax(0.0).cwiseMin(upper);
  const auto residual_at = [&](const Vector& l) { return (data.b + data.A * l).norm(); };
  double res = residual_at(lambda);
  if (lip <= 0.0) {
    out.lambda = std::move(lambda);
    out.residual = res;
    return out;
  }
  const double step = 1.0 / (2.0 * lip);

  const auto face_polish = [&](Vector& l) {
    bool improved = false;
    double best = residual_at(l);
    for (int round = 0; round < data.m + 2; ++round) {
      const Vector grad = h + H * l;
      std::vector<int> free_idx;
      for (int i = 0; i < data.m; ++i) {
        const bool at_lo = l[i] <= 0.0;
        const bool at_hi = l[i] >= upper[i];
        if (at_lo && grad[i] >= 0.0) continue;
        if (at_hi && grad[i] <= 0.0) continue;
        free_idx.push_back(i);
      }
      if (free_idx.empty()) break;
      const int f = static_cast<int>(free_idx.size());
      Eigen::MatrixXd Hff(f, f);
      Vector rhs(f);
      for (int r = 0; r < f; ++r) {
        const int i = free_idx[static_cast<std::size_t>(r)];
        rhs[r] = -h[i];
        for (int cidx = 0; cidx < f; ++cidx) {
          Hff(r, cidx) = H(i, free_idx[static_cast<std::size_t>(cidx)]);
        }
        for (int j = 0; j < data.m; ++j) {
          bool is_free = false;
          for (int cidx = 0; cidx < f; ++cidx) {
            if (free_idx[static_cast<std::size_t>(cidx)] == j) {
              is_free = true;
              break;
            }
          }
          if (!is_free) rhs[r] -= H(i, j) * l[j];
        }
      }
      const double ridge = 1e-14 * (1.0 + Hff.trace());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(
          Hff + ridge * Eigen::MatrixXd::Identity(f, f));
      const Vector xf = ldlt.solve(rhs);
      if (!xf.allFinite()) break;
      Vector cand = l;
      for (int r = 0; r < f; ++r) {
        const int i = free_idx[static_cast<std::size_t>(r)];
        cand[i] = std::min(std::max(xf[r], 0.0), upper[i]);
      }
      const double cand_res = residual_at(cand);
      if (cand_res < best && (cand - l).cwiseAbs().maxCoeff() > 0.0) {
        l = std::move(cand);
        best = cand_res;
        improved = true;
      } else {
        break;
      }
    }
    return improved;
  };

  Vector prev = lambda;
  double momentum = 1.0;
  int it = 0;
  while (it < max_iterations && res > target) {
    ++it;
    const double next_momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_momentum;
    const Vector y =
        (lambda + beta * (lambda - prev)).cwiseMax(0.0).cwiseMin(upper);
    Vector next =
        (y - step * 2.0 * (h + H * y)).cwiseMax(0.0).cwiseMin(upper);
    if (residual_at(next) > res) {
      // The extrapolation overshot; a plain step from the iterate descends.
      next = (lambda - step * 2.0 * (h + H * lambda)).cwiseMax(0.0).cwiseMin(upper);
      momentum = 1.0;
    } else {
      momentum = next_momentum;
    }
    const double move = (next - lambda).cwiseAbs().maxCoeff();
    prev = lambda;
    lambda = std::move(next);
    res = residual_at(lambda);
    if (res <= target) break;
    const bool stalled = move <= 1e-16 * (1.0 + lambda.cwiseAbs().maxCoeff());
    if (stalled || it % 25 == 0) {
      if (face_polish(lambda)) {
        prev = lambda;
        momentum = 1.0;
        res = residual_at(lambda);
      } else if (stalled) {
        break;  // stationary over the box; res is the attainable minimum
      }
    }
  }
  out.lambda = std::move(lambda);
  out.residual = res;
  out.iterations = it;
  return out;
}

}  // namespace

double sp2_stationarity(const Sp2Instance& instance, const Vector& lambda) {
  const Sp2Data data = unpack(instance);
  if (lambda.size() != data.m) throw ContractViolation("sp2_stationarity: lambda size");
  return (data.b + data.A * lambda).norm();
}

double sp2_complementarity(const Sp2Instance& instance, const Vector& lambda) {
  const Sp2Data data = unpack(instance);
  if (lambda.size() != data.m) throw ContractViolation("sp2_complementarity: lambda size");
  return (lambda.array() * data.s.array()).abs().maxCoeff();
}

Sp2Result solve_sp2(const Sp2Instance& instance, double tol, const Vector& warm_start,
                    int max_inner_iterations) {
  if (!(tol > 0.0)) throw ContractViolation("solve_sp2: tol must be > 0");
  const Sp2Data data = unpack(instance);
  if (warm_start.size() != data.m) {
    throw ContractViolation("solve_sp2: warm start size mismatch");
  }
  const double target = data.eta / 2.0;
  for (int i = 0; i < data.m; ++i) {
    if (warm_start[i] < 0.0) throw Sp2WarmStartInvalid("solve_sp2: negative warm start");
  }
  const double warm_stat = (data.b + data.A * warm_start).norm();
  const double warm_comp = (warm_start.array() * data.s.array()).abs().maxCoeff();
  if (warm_stat > target || warm_comp > target) {
    throw Sp2WarmStartInvalid("solve_sp2: warm start violates the certificate");
  }

  // Per-constraint caps keeping the complementarity residual below target.
  // The division can round up, so a multiplier sitting exactly on its cap may
  // re-evaluate one ulp above target; nudge each cap down until the product
  // as actually computed stays within target.
  Vector cap(data.m);
  for (int i = 0; i < data.m; ++i) {
    if (data.s[i] == 0.0) {
      cap[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    double c = target / std::abs(data.s[i]);
    while (c > 0.0 && std::abs(c * data.s[i]) > target) {
      c = std::nextafter(c, 0.0);
    }
    cap[i] = c;
  }

  Sp2Result result;
  result.lambda = warm_start;
  int total_inner = 0;

  // λ = 0 first: certificate may hold with no multipliers at all.
  if (data.b.norm() <= target) {
    result.lambda = Vector::Zero(data.m);
    result.feasible = true;
    result.iterations = 0;
    return result;
  }

  const Eigen::MatrixXd H = data.A.transpose() * data.A;
  const Vector h = data.A.transpose() * data.b;
  double lip = H(0, 0);
  if (data.m > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(H,
                                                        Eigen::EigenvaluesOnly);
    lip = eigs.eigenvalues().maxCoeff();
  }

  // Bisection on the sup-norm cap: a cap is feasible when some multiplier
  // within it meets the stationarity target, so the smallest feasible cap is
  // the minimal attainable sup-norm.
  double t_lo = 0.0;
  double t_hi = warm_start.cwiseAbs().maxCoeff();
  Vector best = warm_start;
  while (t_hi - t_lo > tol) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    const Vector upper = cap.cwiseMin(t_mid);
    BoxLsResult ls =
        box_least_squares(data, H, h, lip, upper, best, target, max_inner_iterations);
    total_inner += ls.iterations;
    if (ls.residual <= target) {
      t_hi = t_mid;
      best = std::move(ls.lambda);
    } else {
      t_lo = t_mid;
    }
  }

  result.lambda = best;
  const double final_stat = (data.b + data.A * best).norm();
  const double final_comp = (best.array() * data.s.array()).abs().maxCoeff();
  result.feasible = final_stat <= target && final_comp <= target &&
                    (best.array() >= 0.0).all();
  result.iterations = total_inner;
  return result;
}

}  // namespace szoqq
