#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "support.hpp"
#include "szoqq/errors.hpp"

using namespace szoqq;
using testing::CallbackOracle;
using testing::CallbackTruth;
using testing::vec;

namespace {

CallbackOracle::Fn affine_family() {
  return [](const Vector& x, int index) { return x.sum() + index; };
}

}  // namespace

TEST_CASE("a batched visit counts as one point query and is logged once") {
  CallbackOracle oracle(2, 2, std::nullopt, affine_family());
  const Vector x = vec({0.25, -0.5});

  const Vector all = oracle.query_all(x);
  CHECK(all.size() == 3);
  CHECK(all[0] == doctest::Approx(-0.25));
  CHECK(all[2] == doctest::Approx(1.75));
  CHECK(oracle.point_queries() == 1);
  CHECK(oracle.log().size() == 1);

  oracle.query(x, 1);
  CHECK(oracle.point_queries() == 2);

  const auto records = oracle.log().snapshot();
  REQUIRE(records.size() == 2);
  CHECK(records[0].first_index == 0);
  CHECK(records[0].values.size() == 3);
  CHECK(records[1].first_index == 1);
  CHECK(records[1].values.size() == 1);
  CHECK(records[1].x.isApprox(x));
}

TEST_CASE("a known linear objective is answered without consulting the body") {
  KnownLinearObjective objective{vec({2.0, -1.0}), 0.5};
  bool touched_objective = false;
  CallbackOracle oracle(2, 1, objective, [&](const Vector& x, int index) {
    if (index == 0) touched_objective = true;
    return x[0];
  });
  const double v = oracle.query(vec({1.0, 3.0}), 0);
  CHECK(v == doctest::Approx(2.0 - 3.0 + 0.5));
  CHECK_FALSE(touched_objective);
}

TEST_CASE("queries reject malformed points and out-of-range indices") {
  CallbackOracle oracle(2, 1, std::nullopt, affine_family());
  CHECK_THROWS_AS(oracle.query(vec({1.0}), 0), ContractViolation);
  CHECK_THROWS_AS(oracle.query(vec({1.0, std::nan("")}), 0), ContractViolation);
  CHECK_THROWS_AS(oracle.query(vec({1.0, 2.0}), 2), ContractViolation);
  CHECK_THROWS_AS(oracle.query(vec({1.0, 2.0}), -1), ContractViolation);
}

TEST_CASE("a non-finite oracle value surfaces as a query error") {
  CallbackOracle oracle(1, 1, std::nullopt, [](const Vector&, int index) {
    return index == 1 ? std::numeric_limits<double>::infinity() : 0.0;
  });
  CHECK_THROWS_AS(oracle.query_all(vec({0.0})), OracleQueryError);
}

TEST_CASE("epigraph reformulation passes known-objective problems through") {
  KnownLinearObjective objective{vec({1.0}), 0.0};
  CallbackOracle oracle(1, 1, objective, [](const Vector& x, int) { return x[0]; });
  const EpigraphOracle lifted = epigraph_reformulate(oracle, 2.0, 1.0);
  CHECK_FALSE(lifted.reformulated);
  CHECK(lifted.oracle == nullptr);
}

TEST_CASE("epigraph wrapper lifts an unknown objective into one extra coordinate") {
  // f0(x) = 5 (constant), one constraint f1(x) = x0 - 1.
  CallbackOracle inner(1, 1, std::nullopt, [](const Vector& x, int index) {
    return index == 0 ? 5.0 : x[0] - 1.0;
  });
  const EpigraphOracle lifted = epigraph_reformulate(inner, 2.0, 1.0);
  REQUIRE(lifted.reformulated);
  REQUIRE(lifted.oracle != nullptr);
  CHECK(lifted.first_constraint_L == doctest::Approx(3.0));
  CHECK(lifted.first_constraint_M == doctest::Approx(1.0));
  CHECK(lifted.oracle->dimension() == 2);
  CHECK(lifted.oracle->constraint_count() == 2);

  REQUIRE(lifted.oracle->known_objective().has_value());
  CHECK(lifted.oracle->known_objective()->c[1] == doctest::Approx(1.0));
  CHECK(lifted.oracle->known_objective()->c[0] == doctest::Approx(0.0));

  // Point (x, gamma) = (0.5, 3): objective = gamma, first constraint = f0 - gamma.
  const Vector values = lifted.oracle->query_all(vec({0.5, 3.0}));
  CHECK(values[0] == doctest::Approx(3.0));
  CHECK(values[1] == doctest::Approx(2.0));
  CHECK(values[2] == doctest::Approx(-0.5));

  // Physical accounting lives on the inner oracle: one batched visit each.
  CHECK(inner.point_queries() == 1);
  CHECK(lifted.oracle->point_queries() == 1);
}

TEST_CASE("epigraph ground truth mirrors the lifted constraint layout") {
  auto inner = std::make_shared<CallbackTruth>(
      1, 1,
      [](const Vector& x, int index) { return index == 0 ? x[0] * x[0] : x[0] - 1.0; },
      [](const Vector& x, int index) {
        return index == 0 ? vec({2.0 * x[0]}) : vec({1.0});
      });
  const auto lifted = epigraph_truth(inner);
  CHECK(lifted->dimension() == 2);
  CHECK(lifted->constraint_count() == 2);

  const Vector p = vec({3.0, 4.0});
  CHECK(lifted->value(p, 0) == doctest::Approx(4.0));
  CHECK(lifted->value(p, 1) == doctest::Approx(9.0 - 4.0));
  CHECK(lifted->value(p, 2) == doctest::Approx(2.0));

  CHECK(lifted->gradient(p, 0).isApprox(vec({0.0, 1.0})));
  CHECK(lifted->gradient(p, 1).isApprox(vec({6.0, -1.0})));
  CHECK(lifted->gradient(p, 2).isApprox(vec({1.0, 0.0})));
}

TEST_CASE("kkt residual is zero at an exact primal-dual solution") {
  // minimize x0 + x1 subject to -x0 <= 0 and -x1 <= 0; solution x = 0,
  // multipliers (1, 1).
  CallbackTruth truth(
      2, 2, [](const Vector& x, int index) { return index == 0 ? x.sum() : -x[index - 1]; },
      [](const Vector&, int index) {
        if (index == 0) return vec({1.0, 1.0});
        return index == 1 ? vec({-1.0, 0.0}) : vec({0.0, -1.0});
      });
  const KktResidual r = kkt_residual(truth, vec({0.0, 0.0}), vec({1.0, 1.0}));
  CHECK(r.stationarity == doctest::Approx(0.0));
  CHECK(r.max_residual == doctest::Approx(0.0));
  CHECK(r.primal_feasible);
  REQUIRE(r.complementarity.size() == 2);
  CHECK(r.complementarity[0] == doctest::Approx(0.0));
}

TEST_CASE("kkt residual reports complementarity slack and infeasibility") {
  CallbackTruth truth(
      1, 1, [](const Vector& x, int index) { return index == 0 ? x[0] : x[0] - 1.0; },
      [](const Vector&, int) { return vec({1.0}); });
  // At x = 2 the constraint is violated; lambda = 0.5 leaves |0.5 * 1| slack.
  const KktResidual r = kkt_residual(truth, vec({2.0}), vec({0.5}));
  CHECK_FALSE(r.primal_feasible);
  CHECK(r.stationarity == doctest::Approx(1.5));
  CHECK(r.complementarity[0] == doctest::Approx(0.5));
  CHECK(r.max_residual == doctest::Approx(1.5));
}

TEST_CASE("kkt residual rejects negative multipliers") {
  CallbackTruth truth(
      1, 1, [](const Vector& x, int) { return x[0]; },
      [](const Vector&, int) { return vec({1.0}); });
  CHECK_THROWS_AS(kkt_residual(truth, vec({0.0}), vec({-1e-12})), ContractViolation);
}

TEST_CASE("termination reasons have stable names") {
  CHECK(std::string(to_string(TerminationReason::BothConditionsMet)) == "both_conditions_met");
  CHECK(std::string(to_string(TerminationReason::MaxIterations)) == "max_iterations");
  CHECK(std::string(to_string(TerminationReason::OracleError)) == "oracle_error");
}
