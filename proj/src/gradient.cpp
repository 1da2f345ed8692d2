#include "szoqq/gradient.hpp"

#include <cmath>

#include "szoqq/errors.hpp"

namespace szoqq {

double safe_radius(const Vector& fvals, double L_max) {
  if (fvals.size() == 0) throw ContractViolation("safe_radius: empty constraint values");
  if (!(L_max > 0.0)) throw ContractViolation("safe_radius: L_max must be > 0");
  double radius = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < fvals.size(); ++i) {
    if (!(fvals[i] < 0.0)) {
      throw StrictFeasibilityLost("safe_radius: constraint value is not strictly negative",
                                  static_cast<int>(i) + 1);
    }
    radius = std::min(radius, -fvals[i] / L_max);
  }
  return radius;
}

double step_size(double l_star, int k, double eta, double alpha_max, int m,
                 double Lambda, int dimension) {
  if (!(l_star > 0.0)) throw ContractViolation("step_size: l_star must be > 0");
  if (k < 1) throw ContractViolation("step_size: iteration index must be >= 1");
  if (!(eta > 0.0)) throw ContractViolation("step_size: eta must be > 0");
  if (!(alpha_max > 0.0)) throw ContractViolation("step_size: alpha_max must be > 0");
  if (m < 1) throw ContractViolation("step_size: m must be >= 1");
  if (!(Lambda > 0.0)) throw ContractViolation("step_size: Lambda must be > 0");
  if (dimension < 1) throw ContractViolation("step_size: dimension must be >= 1");
  const double by_radius = l_star / std::sqrt(static_cast<double>(dimension));
  const double by_iteration = 1.0 / static_cast<double>(k);
  const double by_accuracy = eta / (12.0 * alpha_max * static_cast<double>(m) * Lambda);
  return std::min({by_radius, by_iteration, by_accuracy});
}

GradientEstimate estimate_gradient(ProblemOracle& oracle, const Vector& x, int index,
                                   double nu, double M_i) {
  if (!(nu > 0.0)) throw ContractViolation("estimate_gradient: nu must be > 0");
  if (!(M_i > 0.0)) throw ContractViolation("estimate_gradient: M must be > 0");
  const int d = oracle.dimension();
  const double base = oracle.query(x, index);
  GradientEstimate estimate;
  estimate.g.resize(d);
  estimate.nu = nu;
  estimate.error_bound = gradient_error_coefficient(d, M_i) * nu;
  estimate.samples_used = d + 1;
  Vector probe = x;
  for (int j = 0; j < d; ++j) {
    probe[j] = x[j] + nu;
    estimate.g[j] = (oracle.query(probe, index) - base) / nu;
    probe[j] = x[j];
  }
  return estimate;
}

SweepResult estimate_all_gradients(ProblemOracle& oracle, const Vector& x,
                                   const Vector& base_values, double nu,
                                   const Vector& M) {
  if (!(nu > 0.0)) throw ContractViolation("estimate_all_gradients: nu must be > 0");
  const int d = oracle.dimension();
  const int m = oracle.constraint_count();
  if (base_values.size() != m + 1) {
    throw ContractViolation("estimate_all_gradients: base values must cover f_0..f_m");
  }
  if (M.size() != m) {
    throw ContractViolation("estimate_all_gradients: one M per constraint required");
  }
  SweepResult result;
  result.estimates.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    auto& est = result.estimates[static_cast<std::size_t>(i)];
    est.g.resize(d);
    est.nu = nu;
    est.error_bound = gradient_error_coefficient(d, M[i]) * nu;
    est.samples_used = d + 1;
  }
  Vector probe = x;
  for (int j = 0; j < d; ++j) {
    probe[j] = x[j] + nu;
    const Vector values = oracle.query_all(probe);
    for (int i = 1; i <= m; ++i) {
      if (values[i] > 0.0) {
        result.infeasible.push_back(InfeasibleSample{probe, i, values[i]});
        break;  // one record per infeasible point
      }
    }
    for (int i = 0; i < m; ++i) {
      result.estimates[static_cast<std::size_t>(i)].g[j] =
          (values[i + 1] - base_values[i + 1]) / nu;
    }
    probe[j] = x[j];
  }
  return result;
}

}  // namespace szoqq
