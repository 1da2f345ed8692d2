// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#include "szoqq/problems.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <utility>

#include "szoqq/errors.hpp"

namespace szoqq {
namespace {

class FunctionOracle final : public ProblemOracle {
 public:
  using Fn = std::function<double(const Vector&, int)>;

  FunctionOracle(int dimension, int constraints, std::optional<KnownLinearObjective> objective,
                 Fn fn)
      : ProblemOracle(dimension, constraints, std::move(objective), true), fn_(std::move(fn)) {}

 protected:
  double evaluate(const Vector& x, int index) const override { return fn_(x, index); }

 private:
  Fn fn_;
};

class FunctionTruth final : public GroundTruth {
 public:
  using ValueFn = std::function<double(const Vector&, int)>;
  using GradFn = std::function<Vector(const Vector&, int)>;

  FunctionTruth(int dimension, int constraints, ValueFn value, GradFn gradient)
      : d_(dimension), m_(constraints), value_(std::move(value)), grad_(std::move(gradient)) {}

  int dimension() const override { return d_; }
  int constraint_count() const override { return m_; }
  double value(const Vector& x, int index) const override { return value_(x, index); }
  Vector gradient(const Vector& x, int index) const override { return grad_(x, index); }

 private:
  int d_;
  int m_;
  ValueFn value_;
  GradFn grad_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Toy problem: minimize 0.1·x₁² + x₂ over three smooth constraints.
// ---------------------------------------------------------------------------
namespace toy_problem {
namespace {

double toy_value(const Vector& x, int index) {
  switch (index) {
    case 0:
      return 0.1 * x[0] * x[0] + x[1];
    case 1: {
      const double a = x[0] + 0.5;
      const double b = x[1] - 0.5;
      return 0.5 - (a * a + b * b);
    }
    case 2:
      return x[1] - 1.0;
    case 3:
      return x[0] * x[0] - x[1];
    default:
      throw ContractViolation("toy: constraint index out of range");
  }
}

Vector toy_gradient(const Vector& x, int index) {
  Vector g(2);
  switch (index) {
    case 0:
      g << 0.2 * x[0], 1.0;
      return g;
    case 1:
      g << -2.0 * (x[0] + 0.5), -2.0 * (x[1] - 0.5);
      return g;
    case 2:
      g << 0.0, 1.0;
      return g;
    case 3:
      g << 2.0 * x[0], -1.0;
      return g;
    default:
      throw ContractViolation("toy: constraint index out of range");
  }
}

}  // namespace

Vector x0() {
  Vector x(2);
  x << 0.9, 0.9;
  return x;
}

Vector optimum() { return Vector::Zero(2); }

Vector optimal_multipliers() {
  Vector lambda(3);
  lambda << 0.0, 0.0, 1.0;
  return lambda;
}

std::unique_ptr<ProblemOracle> make_oracle() {
  return std::make_unique<FunctionOracle>(2, 3, std::nullopt, toy_value);
}

std::shared_ptr<const GroundTruth> truth() {
  return std::make_shared<FunctionTruth>(2, 3, toy_value, toy_gradient);
}

std::unique_ptr<ProblemOracle> make_lifted_oracle() {
  KnownLinearObjective gamma;
  gamma.c = Vector::Zero(3);
  gamma.c[2] = 1.0;
  auto fn = [](const Vector& z, int index) -> double {
    const Vector x = z.head(2);
    if (index == 0) return z[2];
    if (index == 1) return toy_value(x, 0) - z[2];
    return toy_value(x, index - 1);
  };
  return std::make_unique<FunctionOracle>(3, 4, std::move(gamma), fn);
}

std::shared_ptr<const GroundTruth> lifted_truth() {
  auto value = [](const Vector& z, int index) -> double {
    const Vector x = z.head(2);
    if (index == 0) return z[2];
    if (index == 1) return toy_value(x, 0) - z[2];
    return toy_value(x, index - 1);
  };
  auto gradient = [](const Vector& z, int index) -> Vector {
    Vector g = Vector::Zero(3);
    if (index == 0) {
      g[2] = 1.0;
      return g;
    }
    const Vector x = z.head(2);
    if (index == 1) {
      g.head(2) = toy_gradient(x, 0);
      g[2] = -1.0;
      return g;
    }
    g.head(2) = toy_gradient(x, index - 1);
    return g;
  };
  return std::make_shared<FunctionTruth>(3, 4, value, gradient);
}

Vector lifted_x0(double gamma0_slack) {
  Vector z(3);
  const Vector x = x0();
  z << x[0], x[1], toy_value(x, 0) + gamma0_slack;
  return z;
}

}  // namespace toy_problem

// ---------------------------------------------------------------------------
// Optimal control benchmark.
// ---------------------------------------------------------------------------
namespace control_problem {
namespace {

constexpr double kA00 = 1.1, kA01 = 1.0, kA10 = -0.5, kA11 = 1.1;
constexpr double kStateBound = 0.7;
constexpr double kRelaxedStateBound = 0.75;
constexpr double kInputBound = 1.5;

// Frozen data generated by scripts/control_reference.py (scipy SLSQP, 12
// multistarts, exact analytic gradients, ftol 1e-12). The reference input
// solves the true-model problem over the closed feasible set; the init input
// rolls out to cost 6.81 exactly with every non-degenerate row below -0.67.
constexpr double kReferenceCost = 5.9639750242833491;
constexpr std::array<double, 12> kReferenceInput = {
    -1.5,
    -0.42897663009401965,
    -0.4335022181025403,
    0.056462934635454563,
    -0.18913357520597901,
    0.19568754693017923,
    -0.034520058973145258,
    0.16829458335396669,
    0.0298153029690051,
    0.090666710588798841,
    0.031797726917030783,
    0.025177875008273658};
constexpr std::array<double, 12> kInitInput = {
    -1.5,
    -0.59191208283570818,
    -0.75408658309416454,
    0.33611825114530841,
    -0.0089443722813632096,
    0.0092543181117582651,
    -0.0016324983985213453,
    0.0079588693060733875,
    0.0014100043799522885,
    0.0042877464360817049,
    0.0015037557817922679,
    0.0011906943919522508};
constexpr std::array<double, 12> kRelaxedInitInput = {
    -1.4749999999999686,
    -0.43898169256776109,
    -0.45909673363669173,
    0.070345786136150765,
    -0.22588574956853841,
    0.24990333952925189,
    0.22347014877195223,
    0.13793576255264992,
    0.26059192154689137,
    0.1263618827018079,
    0.31222186482510561,
    0.1657042798383184};

Rollout rollout_with_bound(const Vector& u, double state_bound) {
  if (u.size() != kInputs) {
    throw ContractViolation("control rollout: input vector must have 12 entries");
  }
  if (!u.allFinite()) {
    throw ContractViolation("control rollout: input must be finite");
  }
  Rollout out;
  out.states.reserve(kSteps);
  out.constraint_values = Vector(kConstraints);
  double x0 = 1.0, x1 = 1.0;
  double cost = 0.0;
  for (int k = 0; k < kSteps; ++k) {
    const double u0 = u[2 * k], u1 = u[2 * k + 1];
    const double nx0 = ((kA00 * x0 + kA01 * x1) + u0) + 0.1 * (x1 * x1);
    const double nx1 = (kA10 * x0 + kA11 * x1) + u1;
    x0 = nx0;
    x1 = nx1;
    Vector xs(2);
    xs << x0, x1;
    out.states.push_back(std::move(xs));
    cost = cost + ((0.5 * x0 * x0 + 0.5 * x1 * x1) + (2.0 * u0 * u0 + 2.0 * u1 * u1));
  }
  out.cost = cost;
  int idx = 0;
  for (int s = 0; s < kSteps; ++s) {
    for (int c = 0; c < kStateDim; ++c) {
      out.constraint_values[idx++] = out.states[s][c] - state_bound;
      out.constraint_values[idx++] = -out.states[s][c] - state_bound;
    }
  }
  for (int k = 0; k < kSteps; ++k) {
    for (int c = 0; c < kInputDim; ++c) {
      out.constraint_values[idx++] = u[2 * k + c] - kInputBound;
      out.constraint_values[idx++] = -u[2 * k + c] - kInputBound;
    }
  }
  return out;
}

/// Forward state sensitivities dx_{s+1}/du, one 2×12 block per step.
std::vector<Eigen::Matrix<double, 2, 12>> state_jacobians(const Vector& u) {
  std::vector<Eigen::Matrix<double, 2, 12>> jacobians;
  jacobians.reserve(kSteps);
  Eigen::Matrix<double, 2, 12> J = Eigen::Matrix<double, 2, 12>::Zero();
  double x0 = 1.0, x1 = 1.0;
  for (int k = 0; k < kSteps; ++k) {
    Eigen::Matrix2d Ak;
    Ak << kA00, kA01 + 0.2 * x1, kA10, kA11;
    Eigen::Matrix<double, 2, 12> Jn = Ak * J;
    Jn(0, 2 * k) += 1.0;
    Jn(1, 2 * k + 1) += 1.0;
    const double nx0 = ((kA00 * x0 + kA01 * x1) + u[2 * k]) + 0.1 * (x1 * x1);
    const double nx1 = (kA10 * x0 + kA11 * x1) + u[2 * k + 1];
    x0 = nx0;
    x1 = nx1;
    J = Jn;
    jacobians.push_back(J);
  }
  return jacobians;
}

Vector make_vector(const std::array<double, 12>& a) {
  Vector v(12);
  for (int i = 0; i < 12; ++i) v[i] = a[i];
  return v;
}

double oracle_value(const Vector& u, int index, double state_bound) {
  const Rollout r = rollout_with_bound(u, state_bound);
  if (index == 0) return r.cost;
  return r.constraint_values[index - 1];
}

Vector truth_gradient(const Vector& u, int index) {
  if (index == 0) {
    Vector g;
    cost_gradient(u, &g);
    return g;
  }
  return constraint_gradient(u, index);
}

class ControlOracle final : public ProblemOracle {
 public:
  explicit ControlOracle(double state_bound)
      : ProblemOracle(kInputs, kConstraints, std::nullopt, true), state_bound_(state_bound) {}

 protected:
  double evaluate(const Vector& u, int index) const override {
    return oracle_value(u, index, state_bound_);
  }
  std::vector<double> evaluate_all(const Vector& u) const override {
    const Rollout r = rollout_with_bound(u, state_bound_);
    std::vector<double> values(1 + kConstraints);
    values[0] = r.cost;
    for (int i = 0; i < kConstraints; ++i) values[1 + i] = r.constraint_values[i];
    return values;
  }

 private:
  double state_bound_;
};

std::shared_ptr<const GroundTruth> truth_with_bound(double state_bound) {
  auto value = [state_bound](const Vector& u, int index) {
    return oracle_value(u, index, state_bound);
  };
  auto gradient = [](const Vector& u, int index) { return truth_gradient(u, index); };
  return std::make_shared<FunctionTruth>(kInputs, kConstraints, value, gradient);
}

}  // namespace

Rollout rollout(const Vector& u) { return rollout_with_bound(u, kStateBound); }

Rollout rollout_relaxed(const Vector& u) { return rollout_with_bound(u, kRelaxedStateBound); }

double cost_gradient(const Vector& u, Vector* grad) {
  if (u.size() != kInputs) {
    throw ContractViolation("control cost_gradient: input vector must have 12 entries");
  }
  Eigen::Matrix<double, 2, 12> J = Eigen::Matrix<double, 2, 12>::Zero();
  Eigen::Matrix<double, 12, 1> g = Eigen::Matrix<double, 12, 1>::Zero();
  double x0 = 1.0, x1 = 1.0;
  double cost = 0.0;
  for (int k = 0; k < kSteps; ++k) {
    Eigen::Matrix2d Ak;
    Ak << kA00, kA01 + 0.2 * x1, kA10, kA11;
    Eigen::Matrix<double, 2, 12> Jn = Ak * J;
    Jn(0, 2 * k) += 1.0;
    Jn(1, 2 * k + 1) += 1.0;
    const double u0 = u[2 * k], u1 = u[2 * k + 1];
    const double nx0 = ((kA00 * x0 + kA01 * x1) + u0) + 0.1 * (x1 * x1);
    const double nx1 = (kA10 * x0 + kA11 * x1) + u1;
    x0 = nx0;
    x1 = nx1;
    J = Jn;
    cost = cost + ((0.5 * x0 * x0 + 0.5 * x1 * x1) + (2.0 * u0 * u0 + 2.0 * u1 * u1));
    Eigen::Vector2d qx(x0, x1);  // 2·Q·x with Q = 0.5·I
    g += J.transpose() * qx;
    g[2 * k] += 4.0 * u0;  // 2·R·u with R = 2·I
    g[2 * k + 1] += 4.0 * u1;
  }
  if (grad != nullptr) *grad = g;
  return cost;
}

Vector constraint_gradient(const Vector& u, int constraint_index) {
  if (constraint_index < 1 || constraint_index > kConstraints) {
    throw ContractViolation("control constraint_gradient: index out of range");
  }
  const int row = constraint_index - 1;
  Vector g = Vector::Zero(kInputs);
  if (row < 4 * kSteps) {
    const auto jacobians = state_jacobians(u);
    const int step = row / 4;
    const int coord = (row % 4) / 2;
    const double sign = (row % 2 == 0) ? 1.0 : -1.0;
    g = sign * jacobians[step].row(coord).transpose();
  } else {
    const int r = row - 4 * kSteps;
    const int k = r / 4;
    const int coord = (r % 4) / 2;
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;
    g[2 * k + coord] = sign;
  }
  return g;
}

Vector x0() { return make_vector(kInitInput); }

std::unique_ptr<ProblemOracle> make_oracle() {
  return std::make_unique<ControlOracle>(kStateBound);
}

std::shared_ptr<const GroundTruth> truth() { return truth_with_bound(kStateBound); }

double reference_cost() { return kReferenceCost; }

Vector reference_input() { return make_vector(kReferenceInput); }

Vector relaxed_x0() { return make_vector(kRelaxedInitInput); }

std::unique_ptr<ProblemOracle> make_relaxed_oracle() {
  return std::make_unique<ControlOracle>(kRelaxedStateBound);
}

std::shared_ptr<const GroundTruth> relaxed_truth() {
  return truth_with_bound(kRelaxedStateBound);
}

}  // namespace control_problem

// ---------------------------------------------------------------------------
// Seeded random convex quadratic instances.
// ---------------------------------------------------------------------------

RandomSmoothInstance::RandomSmoothInstance(std::uint64_t seed, int dimension, int constraints)
    : d_(dimension), m_(constraints) {
  if (dimension < 1 || constraints < 1) {
    throw ContractViolation("RandomSmoothInstance: dimension and constraints must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  c_ = Vector(d_);
  for (int i = 0; i < d_; ++i) c_[i] = normal(rng);
  if (c_.norm() < 1e-12) c_[0] = 1.0;
  c_ /= c_.norm();

  x0_ = Vector::Zero(d_);
  ball_radius_ = 2.0;

  P_.reserve(m_);
  b_.reserve(m_);
  offs_.reserve(m_);
  // Constraints 1..m-1 are random PSD quadratics strictly negative at the
  // origin; the last constraint is the ball ‖x‖² ≤ ball_radius² keeping the
  // feasible region (and hence every safe sample) inside a bounded region
  // where the frozen Lipschitz bounds below are valid.
  for (int i = 0; i + 1 < m_; ++i) {
    Eigen::MatrixXd G(d_, d_);
    for (int r = 0; r < d_; ++r) {
      for (int c = 0; c < d_; ++c) G(r, c) = normal(rng) / std::sqrt(static_cast<double>(d_));
    }
    P_.push_back(G.transpose() * G);
    Vector b(d_);
    for (int r = 0; r < d_; ++r) b[r] = 0.5 * normal(rng);
    b_.push_back(b);
    offs_.push_back(-(0.2 + 0.3 * uniform(rng)));
  }
  P_.push_back(Eigen::MatrixXd::Identity(d_, d_));
  b_.push_back(Vector::Zero(d_));
  offs_.push_back(-ball_radius_ * ball_radius_);

  exact_L_ = Vector(m_);
  exact_M_ = Vector(m_);
  // ‖∇f_i(x)‖ = ‖2 P_i x + b_i‖ ≤ 2·λmax·(radius + pad) + ‖b_i‖ on a padded
  // ball; the pad covers finite-difference probes just outside the feasible
  // region's hull. ∇²f_i = 2 P_i exactly.
  const double pad = 0.5;
  for (int i = 0; i < m_; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(P_[i]);
    const double lambda_max = eigs.eigenvalues().maxCoeff();
    exact_M_[i] = 2.0 * lambda_max;
    exact_L_[i] = 2.0 * lambda_max * (ball_radius_ + pad) + b_[i].norm();
  }
}

double RandomSmoothInstance::constraint_value(const Vector& x, int index) const {
  if (index < 1 || index > m_) {
    throw ContractViolation("RandomSmoothInstance: constraint index out of range");
  }
  const auto& P = P_[index - 1];
  return x.dot(P * x) + b_[index - 1].dot(x) + offs_[index - 1];
}

Vector RandomSmoothInstance::constraint_gradient(const Vector& x, int index) const {
  if (index < 1 || index > m_) {
    throw ContractViolation("RandomSmoothInstance: constraint index out of range");
  }
  return 2.0 * (P_[index - 1] * x) + b_[index - 1];
}

std::unique_ptr<ProblemOracle> RandomSmoothInstance::make_oracle() const {
  KnownLinearObjective objective;
  objective.c = c_;
  auto self = *this;  // instances are small, immutable value types
  auto fn = [self](const Vector& x, int index) -> double {
    if (index == 0) return self.c_.dot(x);
    return self.constraint_value(x, index);
  };
  return std::make_unique<FunctionOracle>(d_, m_, std::move(objective), std::move(fn));
}

std::shared_ptr<const GroundTruth> RandomSmoothInstance::truth() const {
  auto self = *this;
  auto value = [self](const Vector& x, int index) -> double {
    if (index == 0) return self.c_.dot(x);
    return self.constraint_value(x, index);
  };
  auto gradient = [self](const Vector& x, int index) -> Vector {
    if (index == 0) return self.c_;
    return self.constraint_gradient(x, index);
  };
  return std::make_shared<FunctionTruth>(d_, m_, value, gradient);
}

// ---------------------------------------------------------------------------
// Registry.
// ---------------------------------------------------------------------------

std::vector<ProblemInfo> registry() {
  return {
      {"toy", 2, 3, "two-dimensional benchmark, optimum at the origin, objective unknown"},
      {"toy-lifted", 3, 4, "toy problem pre-lifted to its epigraph form, objective known"},
      {"control", 12, 48, "six-step optimal control benchmark, cost unknown"},
      {"random", 2, 2, "seeded convex quadratic instance (seed, d, m configurable)"},
  };
}

ProblemHandle instantiate(const std::string& name, const ProblemParams& params) {
  ProblemHandle handle;
  handle.name = name;
  if (name == "toy") {
    handle.oracle = toy_problem::make_oracle();
    handle.truth = toy_problem::truth();
    handle.x0 = toy_problem::x0();
  } else if (name == "toy-lifted") {
    handle.oracle = toy_problem::make_lifted_oracle();
    handle.truth = toy_problem::lifted_truth();
    handle.x0 = toy_problem::lifted_x0(1.0);
  } else if (name == "control") {
    handle.oracle = control_problem::make_oracle();
    handle.truth = control_problem::truth();
    handle.x0 = control_problem::x0();
  } else if (name == "random") {
    RandomSmoothInstance instance(params.seed, params.d, params.m);
    handle.oracle = instance.make_oracle();
    handle.truth = instance.truth();
    handle.x0 = instance.x0();
  } else {
    throw ConfigError("unknown problem: " + name);
  }
  return handle;
}

}  // namespace szoqq
