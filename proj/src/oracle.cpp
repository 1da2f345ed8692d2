#include "szoqq/oracle.hpp"

#include <chrono>
#include <cmath>

#include "szoqq/errors.hpp"

namespace szoqq {

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::BothConditionsMet: return "both_conditions_met";
    case TerminationReason::MaxIterations: return "max_iterations";
    case TerminationReason::OracleError: return "oracle_error";
  }
  return "unknown";
}

ProblemOracle::ProblemOracle(int dimension, int constraint_count,
                             std::optional<KnownLinearObjective> objective,
                             bool concurrent_queries_allowed)
    : dimension_(dimension),
      constraint_count_(constraint_count),
      objective_(std::move(objective)),
      concurrent_(concurrent_queries_allowed) {
  if (dimension_ <= 0) throw ContractViolation("oracle dimension must be > 0");
  if (constraint_count_ <= 0) throw ContractViolation("oracle needs at least one constraint");
  if (objective_ && objective_->c.size() != dimension_) {
    throw ContractViolation("known objective dimension mismatch");
  }
}

void ProblemOracle::check_point(const Vector& x) const {
  if (x.size() != dimension_) {
    throw ContractViolation("query point has wrong dimension");
  }
  if (!x.allFinite()) {
    throw ContractViolation("query point has non-finite entries");
  }
}

std::vector<double> ProblemOracle::evaluate_all(const Vector& x) const {
  std::vector<double> values(static_cast<std::size_t>(constraint_count_) + 1);
  for (int i = 0; i <= constraint_count_; ++i) {
    values[static_cast<std::size_t>(i)] = evaluate(x, i);
  }
  return values;
}

double ProblemOracle::query(const Vector& x, int index) {
  check_point(x);
  if (index < 0 || index > constraint_count_) {
    throw ContractViolation("query index out of range");
  }
  const auto t0 = std::chrono::steady_clock::now();
  double value;
  if (index == 0 && objective_) {
    value = objective_->value(x);
  } else {
    value = evaluate(x, index);
  }
  const auto t1 = std::chrono::steady_clock::now();
  if (!std::isfinite(value)) {
    throw OracleQueryError("oracle returned a non-finite value");
  }
  std::lock_guard<std::mutex> lock(state_mutex_);
  query_seconds_ += std::chrono::duration<double>(t1 - t0).count();
  ++point_queries_;
  log_.append(SampleRecord{x, iteration_tag_, index, {value}});
  return value;
}

Vector ProblemOracle::query_all(const Vector& x) {
  check_point(x);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> values = evaluate_all(x);
  const auto t1 = std::chrono::steady_clock::now();
  if (objective_) {
    values[0] = objective_->value(x);
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw OracleQueryError("oracle returned a non-finite value");
    }
  }
  Vector out(constraint_count_ + 1);
  for (int i = 0; i <= constraint_count_; ++i) {
    out[i] = values[static_cast<std::size_t>(i)];
  }
  std::lock_guard<std::mutex> lock(state_mutex_);
  query_seconds_ += std::chrono::duration<double>(t1 - t0).count();
  ++point_queries_;
  log_.append(SampleRecord{x, iteration_tag_, 0, std::move(values)});
  return out;
}

namespace {

/// Dimension-(d+1) wrapper: coordinates (x, γ), objective γ, first constraint
/// f₀(x) − γ, then the original constraints. Each batched visit costs one
/// batched visit of the inner oracle.
class EpigraphWrapper : public ProblemOracle {
 public:
  explicit EpigraphWrapper(ProblemOracle& inner)
      : ProblemOracle(inner.dimension() + 1, inner.constraint_count() + 1,
                      make_objective(inner.dimension() + 1),
                      inner.concurrent_queries_allowed()),
        inner_(&inner) {}

 protected:
  double evaluate(const Vector& x, int index) const override {
    const Vector inner_x = x.head(inner_->dimension());
    const double gamma = x[inner_->dimension()];
    if (index == 0) return gamma;
    if (index == 1) return inner_->query(inner_x, 0) - gamma;
    return inner_->query(inner_x, index - 1);
  }

  std::vector<double> evaluate_all(const Vector& x) const override {
    const Vector inner_x = x.head(inner_->dimension());
    const double gamma = x[inner_->dimension()];
    const Vector inner_values = inner_->query_all(inner_x);
    std::vector<double> values(static_cast<std::size_t>(constraint_count()) + 1);
    values[0] = gamma;
    values[1] = inner_values[0] - gamma;
    for (int i = 1; i <= inner_->constraint_count(); ++i) {
      values[static_cast<std::size_t>(i) + 1] = inner_values[i];
    }
    return values;
  }

 private:
  static KnownLinearObjective make_objective(int dimension) {
    Vector c = Vector::Zero(dimension);
    c[dimension - 1] = 1.0;
    return KnownLinearObjective{std::move(c), 0.0};
  }

  ProblemOracle* inner_;
};

class EpigraphTruthWrapper : public GroundTruth {
 public:
  explicit EpigraphTruthWrapper(std::shared_ptr<const GroundTruth> inner)
      : inner_(std::move(inner)) {}

  int dimension() const override { return inner_->dimension() + 1; }
  int constraint_count() const override { return inner_->constraint_count() + 1; }

  double value(const Vector& x, int index) const override {
    const Vector inner_x = x.head(inner_->dimension());
    const double gamma = x[inner_->dimension()];
    if (index == 0) return gamma;
    if (index == 1) return inner_->value(inner_x, 0) - gamma;
    return inner_->value(inner_x, index - 1);
  }

  Vector gradient(const Vector& x, int index) const override {
    const Vector inner_x = x.head(inner_->dimension());
    Vector g = Vector::Zero(dimension());
    if (index == 0) {
      g[dimension() - 1] = 1.0;
      return g;
    }
    if (index == 1) {
      g.head(inner_->dimension()) = inner_->gradient(inner_x, 0);
      g[dimension() - 1] = -1.0;
      return g;
    }
    g.head(inner_->dimension()) = inner_->gradient(inner_x, index - 1);
    return g;
  }

 private:
  std::shared_ptr<const GroundTruth> inner_;
};

}  // namespace

EpigraphOracle epigraph_reformulate(ProblemOracle& inner, double objective_L,
                                    double objective_M) {
  if (inner.known_objective()) {
    return EpigraphOracle{nullptr, 0.0, 0.0, false};
  }
  if (!(objective_L > 0.0) || !(objective_M > 0.0)) {
    throw ContractViolation("epigraph reformulation needs positive objective bounds");
  }
  return EpigraphOracle{std::make_unique<EpigraphWrapper>(inner), objective_L + 1.0,
                        objective_M, true};
}

std::unique_ptr<GroundTruth> epigraph_truth(std::shared_ptr<const GroundTruth> inner) {
  return std::make_unique<EpigraphTruthWrapper>(std::move(inner));
}

KktResidual kkt_residual(const GroundTruth& truth, const Vector& x, const Vector& lambda) {
  if (x.size() != truth.dimension()) {
    throw ContractViolation("kkt_residual: point dimension mismatch");
  }
  if (lambda.size() != truth.constraint_count()) {
    throw ContractViolation("kkt_residual: one multiplier per constraint required");
  }
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0.0) {
      throw ContractViolation("kkt_residual: multipliers must be nonnegative");
    }
  }
  KktResidual out;
  Vector stat = truth.gradient(x, 0);
  out.primal_feasible = true;
  out.complementarity.resize(static_cast<std::size_t>(lambda.size()));
  double max_comp = 0.0;
  for (int i = 1; i <= truth.constraint_count(); ++i) {
    const double fi = truth.value(x, i);
    if (fi > 0.0) out.primal_feasible = false;
    const double li = lambda[i - 1];
    if (li != 0.0) stat += li * truth.gradient(x, i);
    const double comp = std::abs(li * fi);
    out.complementarity[static_cast<std::size_t>(i - 1)] = comp;
    max_comp = std::max(max_comp, comp);
  }
  out.stationarity = stat.norm();
  out.max_residual = std::max(out.stationarity, max_comp);
  return out;
}

}  // namespace szoqq
