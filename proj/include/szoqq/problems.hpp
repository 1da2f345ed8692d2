// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "szoqq/oracle.hpp"
#include "szoqq/types.hpp"

namespace szoqq {

/// Instantiated benchmark: black-box oracle, segregated ground truth, and the
/// canonical strictly feasible start point.
struct ProblemHandle {
  std::string name;
  std::unique_ptr<ProblemOracle> oracle;
  std::shared_ptr<const GroundTruth> truth;
  Vector x0;
};

/// Two-dimensional benchmark with three constraints and optimum at the
/// origin: minimize 0.1·x₁² + x₂ subject to
///   0.5 − ‖x + (0.5, −0.5)‖² ≤ 0,  x₂ − 1 ≤ 0,  x₁² − x₂ ≤ 0.
/// The objective is treated as unknown (queried like a constraint).
namespace toy_problem {
Vector x0();                                   // (0.9, 0.9)
Vector optimum();                              // (0, 0)
Vector optimal_multipliers();                  // (0, 0, 1)
std::unique_ptr<ProblemOracle> make_oracle();  // d=2, m=3, objective unknown
std::shared_ptr<const GroundTruth> truth();

/// The same problem pre-lifted to its epigraph form (d=3, m=4, objective γ
/// known linear). gamma0_slack sets γ₀ − f₀(x0).
std::unique_ptr<ProblemOracle> make_lifted_oracle();
std::shared_ptr<const GroundTruth> lifted_truth();
Vector lifted_x0(double gamma0_slack);
}  // namespace toy_problem

/// Six-step discrete-time optimal control of a mildly nonlinear system
///   x⁺ = A x + B u + (0.1·(x₂)², 0),  x(0) = (1, 1),
/// over the stacked input vector u ∈ ℝ¹². Cost Σ x_kᵀQx_k + u_kᵀRu_k,
/// box constraints ‖x_k‖∞ ≤ 0.7 (k = 1..6) and ‖u_k‖∞ ≤ 1.5 (k = 0..5):
/// 48 constraints, ordered states first, step-major, +coordinate before
/// −coordinate. The cost is treated as unknown.
namespace control_problem {
constexpr int kSteps = 6;
constexpr int kStateDim = 2;
constexpr int kInputDim = 2;
constexpr int kInputs = kSteps * kInputDim;         // 12
constexpr int kConstraints = 2 * 2 * kSteps * 2;    // 48

struct Rollout {
  std::vector<Vector> states;  ///< x_1..x_6
  double cost = 0.0;
  Vector constraint_values;    ///< 48 entries in canonical order
};

Rollout rollout(const Vector& u);

/// Analytic gradients of cost and constraints with respect to u.
double cost_gradient(const Vector& u, Vector* grad);
Vector constraint_gradient(const Vector& u, int constraint_index);

/// Frozen start at rollout cost 6.81. The feasible set of this problem has an
/// empty interior — the first coordinate of the first state is
/// x₁⁽¹⁾ = 2.2 + u₀⁽¹⁾ with u₀⁽¹⁾ ≥ −1.5, so x₁⁽¹⁾ ≥ 0.7 with equality only
/// at the input bound. Every feasible input therefore has two rows exactly
/// active; this start has those two rows at 0 (one of them +1 ulp in double
/// arithmetic) and every other row below −0.67.
Vector x0();
std::unique_ptr<ProblemOracle> make_oracle();
std::shared_ptr<const GroundTruth> truth();

/// Frozen offline reference solution of the true-model problem.
double reference_cost();
Vector reference_input();

/// Diagnostic variant with the state bound relaxed from 0.7 to 0.75, the
/// smallest round value that gives the feasible set a nonempty interior.
/// Used to demonstrate the solver end to end on these dynamics, which the
/// degenerate pinned bound makes impossible.
Rollout rollout_relaxed(const Vector& u);
Vector relaxed_x0();  ///< strictly feasible, margin ≥ 0.025, cost ≈ 6.896
std::unique_ptr<ProblemOracle> make_relaxed_oracle();
std::shared_ptr<const GroundTruth> relaxed_truth();
}  // namespace control_problem

/// Seeded convex quadratic instance with a known linear objective: m−1 random
/// PSD quadratic constraints plus one ball constraint keeping the feasible
/// region bounded. x0 is strictly feasible by construction and the exact
/// Lipschitz/smoothness bounds over the bounding ball are available.
class RandomSmoothInstance {
 public:
  RandomSmoothInstance(std::uint64_t seed, int dimension, int constraints);

  int dimension() const { return d_; }
  int constraints() const { return m_; }
  Vector x0() const { return x0_; }
  Vector exact_L() const { return exact_L_; }  ///< valid over the bounding ball
  Vector exact_M() const { return exact_M_; }
  Vector objective() const { return c_; }

  std::unique_ptr<ProblemOracle> make_oracle() const;
  std::shared_ptr<const GroundTruth> truth() const;

  double constraint_value(const Vector& x, int index) const;  ///< 1-based
  Vector constraint_gradient(const Vector& x, int index) const;

 private:
  int d_;
  int m_;
  Vector c_;
  Vector x0_;
  std::vector<Eigen::MatrixXd> P_;
  std::vector<Vector> b_;
  std::vector<double> offs_;
  double ball_radius_ = 0.0;
  Vector exact_L_;
  Vector exact_M_;
};

struct ProblemInfo {
  std::string name;
  int dimension = 0;
  int constraints = 0;
  std::string description;
};

/// Problems the CLI can instantiate by name.
std::vector<ProblemInfo> registry();

/// params: for "random", {seed, d, m}; ignored otherwise.
struct ProblemParams {
  std::uint64_t seed = 1;
  int d = 2;
  int m = 2;
};

ProblemHandle instantiate(const std::string& name, const ProblemParams& params);

}  // namespace szoqq
