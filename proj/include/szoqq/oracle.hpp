// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "szoqq/types.hpp"

namespace szoqq {

/// One oracle visit: the queried point, the iteration it belongs to, and the
/// returned values for indices [first_index, first_index + values.size()).
/// Index 0 is the objective; 1..m are the constraints.
struct SampleRecord {
  Vector x;
  int iteration = -1;  ///< -1 when queried outside the main loop
  int first_index = 0;
  std::vector<double> values;
};

/// Append-only, thread-safe log of every oracle query.
class SampleLog {
 public:
  void append(SampleRecord record) {
    std::lock_guard<std::mutex> lock(mutex_);
    records_.push_back(std::move(record));
  }
  std::vector<SampleRecord> snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_;
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<SampleRecord> records_;
};

/// Objective known in closed linear form, c·x + offset. When present the
/// solver never spends samples on the objective.
struct KnownLinearObjective {
  Vector c;
  double offset = 0.0;
  double value(const Vector& x) const { return c.dot(x) + offset; }
};

/// Query interface the solver sees. Every query is logged and counted; a
/// batched query of all indices at one point counts as a single point query.
class ProblemOracle {
 public:
  ProblemOracle(int dimension, int constraint_count,
                std::optional<KnownLinearObjective> objective,
                bool concurrent_queries_allowed);
  virtual ~ProblemOracle() = default;

  int dimension() const { return dimension_; }
  int constraint_count() const { return constraint_count_; }
  const std::optional<KnownLinearObjective>& known_objective() const { return objective_; }
  bool concurrent_queries_allowed() const { return concurrent_; }

  /// Value of f_index at x. Counts as one point query.
  double query(const Vector& x, int index);

  /// Values of f_0..f_m at x in one visit. Counts as one point query.
  Vector query_all(const Vector& x);

  void set_iteration_tag(int tag) { iteration_tag_ = tag; }
  const SampleLog& log() const { return log_; }
  std::int64_t point_queries() const { return point_queries_; }

  /// Whether query timings below are self-reported and may be excluded from
  /// solver wall-time accounting.
  bool reports_query_time() const { return true; }
  double query_seconds() const { return query_seconds_; }

 protected:
  /// Pure evaluation of f_index at x; must not be visible to the solver in
  /// any other way.
  virtual double evaluate(const Vector& x, int index) const = 0;

  /// Batched evaluation; default loops over evaluate. Overridden where one
  /// visit naturally produces all values.
  virtual std::vector<double> evaluate_all(const Vector& x) const;

 private:
  void check_point(const Vector& x) const;

  int dimension_;
  int constraint_count_;
  std::optional<KnownLinearObjective> objective_;
  bool concurrent_;
  SampleLog log_;
  std::int64_t point_queries_ = 0;
  double query_seconds_ = 0.0;
  int iteration_tag_ = -1;
  std::mutex state_mutex_;
};

/// Exact values and gradients, reserved for tests and post-run verification.
/// Solver code paths never receive a GroundTruth.
class GroundTruth {
 public:
  virtual ~GroundTruth() = default;
  virtual int dimension() const = 0;
  virtual int constraint_count() const = 0;
  virtual double value(const Vector& x, int index) const = 0;
  virtual Vector gradient(const Vector& x, int index) const = 0;
};

/// Oracle plus the smoothness constants of its synthetic first constraint,
/// produced by epigraph_reformulate.
struct EpigraphOracle {
  std::unique_ptr<ProblemOracle> oracle;  ///< null when no reformulation was needed
  double first_constraint_L = 0.0;        ///< objective_L + 1
  double first_constraint_M = 0.0;        ///< objective_M
  bool reformulated = false;
};

/// Lifts a problem with unknown objective into dimension d+1: minimize the
/// new coordinate γ subject to f₀(x) − γ ≤ 0 and the original constraints.
/// A problem whose objective is already known passes through unchanged
/// (oracle left null, reformulated=false).
/// The wrapper forwards each batched visit as one batched visit of `inner`,
/// so physical point-query accounting lives on the inner oracle.
EpigraphOracle epigraph_reformulate(ProblemOracle& inner, double objective_L,
                                    double objective_M);

/// Ground truth of the epigraph-reformulated problem: objective γ, first
/// constraint f₀(x) − γ, then the original constraints.
std::unique_ptr<GroundTruth> epigraph_truth(std::shared_ptr<const GroundTruth> inner);

/// Approximate-KKT error of (x, λ) under exact gradients. λ must be
/// elementwise nonnegative with one entry per constraint.
KktResidual kkt_residual(const GroundTruth& truth, const Vector& x, const Vector& lambda);

}  // namespace szoqq
