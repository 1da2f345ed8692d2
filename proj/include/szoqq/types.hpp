// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "szoqq/errors.hpp"

namespace szoqq {

using Vector = Eigen::VectorXd;

/// Per-constraint gradient-Lipschitz (L) and gradient-smoothness (M) bounds,
/// together with the growth factor applied when an infeasible sample shows a
/// bound was too small.
struct SmoothnessParams {
  Vector L;                        ///< one entry per constraint, strictly positive
  Vector M;                        ///< one entry per constraint, strictly positive
  double growth_factor = 2.0;      ///< multiplier applied on adaptation, > 1
  int infeasible_sample_count = 0; ///< infeasible samples observed so far

  double L_max() const { return L.size() > 0 ? L.maxCoeff() : 0.0; }
  double M_max() const { return M.size() > 0 ? M.maxCoeff() : 0.0; }
  double M_sum() const { return M.size() > 0 ? M.sum() : 0.0; }

  /// Throws ContractViolation unless all entries are strictly positive, the
  /// sizes agree, and growth_factor > 1.
  void validate() const {
    if (L.size() != M.size()) {
      throw ContractViolation("SmoothnessParams: L and M must have equal length");
    }
    if (L.size() == 0) {
      throw ContractViolation("SmoothnessParams: at least one constraint required");
    }
    for (Eigen::Index i = 0; i < L.size(); ++i) {
      if (!(L[i] > 0.0) || !(M[i] > 0.0)) {
        throw ContractViolation("SmoothnessParams: L and M entries must be > 0");
      }
    }
    if (!(growth_factor > 1.0)) {
      throw ContractViolation("SmoothnessParams: growth_factor must be > 1");
    }
  }
};

/// Scalar knobs of one solver run.
struct AlgorithmConfig {
  double mu = 1e-3;          ///< proximal weight, > 0
  double eta = 1e-2;         ///< target KKT accuracy, > 0
  double lambda_cap = 1.0;   ///< dual bound Λ, > 0
  double kappa = 2.0;        ///< Λ growth factor on certificate failure, > 1
  std::optional<double> xi;  ///< step threshold; empty = resolve from h(eta)
  int max_iterations = 100000;
  double sp1_tolerance = 1e-9;
  double sp2_tolerance = 1e-9;
  int max_dual_iterations = 10000;

  void validate() const {
    if (!(mu > 0.0)) throw ContractViolation("AlgorithmConfig: mu must be > 0");
    if (!(eta > 0.0)) throw ContractViolation("AlgorithmConfig: eta must be > 0");
    if (!(lambda_cap > 0.0)) throw ContractViolation("AlgorithmConfig: lambda_cap must be > 0");
    if (!(kappa > 1.0)) throw ContractViolation("AlgorithmConfig: kappa must be > 1");
    if (xi && !(*xi > 0.0)) throw ContractViolation("AlgorithmConfig: xi must be > 0");
    if (max_iterations < 0) throw ContractViolation("AlgorithmConfig: max_iterations must be >= 0");
    if (!(sp1_tolerance > 0.0) || !(sp2_tolerance > 0.0)) {
      throw ContractViolation("AlgorithmConfig: solver tolerances must be > 0");
    }
    if (max_dual_iterations <= 0) {
      throw ContractViolation("AlgorithmConfig: max_dual_iterations must be > 0");
    }
  }
};

/// Approximate-KKT error of a primal/dual pair, measured against exact
/// gradients.
struct KktResidual {
  double stationarity = 0.0;           ///< ‖∇f₀ + Σ λᵢ ∇fᵢ‖₂
  std::vector<double> complementarity; ///< |λᵢ fᵢ| per constraint
  double max_residual = 0.0;           ///< max of stationarity and complementarity
  bool primal_feasible = false;        ///< all fᵢ ≤ 0 at the point
};

enum class TerminationReason {
  BothConditionsMet,  ///< small step and a certified bounded multiplier
  MaxIterations,
  OracleError,
};

const char* to_string(TerminationReason reason);

/// Final output of a solver run.
struct TerminationReport {
  Vector x_tilde;
  Vector lambda_tilde;
  int k_tilde = 0;
  TerminationReason reason = TerminationReason::MaxIterations;
  std::optional<KktResidual> residual;  ///< filled by the verification layer
  std::string message;                  ///< diagnostic detail on abnormal exit
};

}  // namespace szoqq
