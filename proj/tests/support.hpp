// Shared test fixtures: closed-form oracles and ground truths built from
// callables, plus small vector builders.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "szoqq/oracle.hpp"

namespace szoqq::testing {

/// Oracle whose values come from one callable; index 0 is the objective.
class CallbackOracle final : public ProblemOracle {
 public:
  using Fn = std::function<double(const Vector&, int)>;

  CallbackOracle(int dimension, int constraints, std::optional<KnownLinearObjective> objective,
                 Fn fn)
      : ProblemOracle(dimension, constraints, std::move(objective), false),
        fn_(std::move(fn)) {}

 protected:
  double evaluate(const Vector& x, int index) const override { return fn_(x, index); }

 private:
  Fn fn_;
};

class CallbackTruth final : public GroundTruth {
 public:
  using ValueFn = std::function<double(const Vector&, int)>;
  using GradFn = std::function<Vector(const Vector&, int)>;

  CallbackTruth(int dimension, int constraints, ValueFn value, GradFn gradient)
      : dimension_(dimension),
        constraints_(constraints),
        value_(std::move(value)),
        gradient_(std::move(gradient)) {}

  int dimension() const override { return dimension_; }
  int constraint_count() const override { return constraints_; }
  double value(const Vector& x, int index) const override { return value_(x, index); }
  Vector gradient(const Vector& x, int index) const override { return gradient_(x, index); }

 private:
  int dimension_;
  int constraints_;
  ValueFn value_;
  GradFn gradient_;
};

inline Vector vec(std::initializer_list<double> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v[i++] = e;
  return v;
}

}  // namespace szoqq::testing
