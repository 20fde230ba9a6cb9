#include <doctest.h>

#include "imuqp/reference_solvers.hpp"
#include "support/random_qp.hpp"

using namespace imuqp;
using imuqp::testing::RawQp;
using imuqp::testing::Rng;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

QpProblem<double> single_constraint() {
  return QpProblem<double>(MatrixXd::Constant(1, 1, 2.0), VectorXd::Constant(1, 2.0), MatrixXd::Constant(1, 1, 1.0),
                           VectorXd::Constant(1, -2.0));
}

}  // namespace

TEST_CASE("Hildreth") {
  SUBCASE("interior optimum") {
    QpProblem<double> prob(MatrixXd::Identity(2, 2), VectorXd::Ones(2), MatrixXd::Identity(2, 2),
                           VectorXd::Constant(2, 5.0));
    const auto sol = hildreth_solve(prob);
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.c_star == 0);
    CHECK(sol.theta.isApprox(-VectorXd::Ones(2)));
  }
  SUBCASE("single constraint") {
    const auto sol = hildreth_solve(single_constraint());
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.theta(0) == doctest::Approx(-2.0));
    CHECK(sol.lambda_active(0) == doctest::Approx(2.0));
  }
  SUBCASE("agrees with the active-set solver on random instances") {
    Rng rng(31);
    HildrethOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 200000;
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const RawQp raw = imuqp::testing::random_feasible_qp(rng, 3, 8, 0.0);
      const auto prob = raw.problem();
      const auto mine = solve(prob);
      const auto h = hildreth_solve(prob, opts);
      if (h.status != Status::Optimal) continue;
      ++compared;
      CHECK((h.theta - mine.theta).norm() <= 1e-5);
    }
    CHECK(compared >= 90);
  }
  SUBCASE("sweep cap is reported") {
    Rng rng(32);
    const RawQp raw = imuqp::testing::random_feasible_qp(rng, 3, 8, 0.0);
    HildrethOptions opts;
    opts.tol = 1e-300;
    opts.max_iter = 3;
    const auto prob = raw.problem();
    if (solve(prob).c_star > 0) CHECK(hildreth_solve(prob, opts).status == Status::IterationLimit);
    CHECK_THROWS_AS(hildreth_solve(prob, HildrethOptions{0.0, 10}), Error);
  }
}

TEST_CASE("active-set enumeration") {
  SUBCASE("unconstrained optimum") {
    QpProblem<double> prob(MatrixXd::Identity(2, 2), VectorXd::Ones(2), MatrixXd::Identity(2, 2),
                           VectorXd::Constant(2, 5.0));
    const auto sol = enumerate_active_sets(prob);
    CHECK(sol.c_star == 0);
    CHECK(sol.theta.isApprox(-VectorXd::Ones(2)));
  }
  SUBCASE("single constraint") {
    const auto sol = enumerate_active_sets(single_constraint());
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.theta(0) == doctest::Approx(-2.0));
    CHECK(sol.lambda_active(0) == doctest::Approx(2.0));
    CHECK(sol.active == std::vector<Index>{0});
  }
  SUBCASE("infeasible triple") {
    MatrixXd m(3, 2);
    m << -1, 1, 1, 1, 0, -1;
    VectorXd g(3);
    g << 0, 0, -1;
    QpProblem<double> prob(MatrixXd::Identity(2, 2), VectorXd::Zero(2), m, g);
    CHECK(enumerate_active_sets(prob).status == Status::Infeasible);
  }
  SUBCASE("size guard") {
    QpProblem<double> prob(MatrixXd::Identity(2, 2), VectorXd::Zero(2), MatrixXd::Ones(17, 2),
                           VectorXd::Ones(17));
    try {
      enumerate_active_sets(prob);
      FAIL("expected SizeLimit");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SizeLimit);
    }
  }
  SUBCASE("rank-deficient subsets are skipped") {
    MatrixXd m(3, 2);
    m << 1, 0, 2, 0, 0, 1;
    VectorXd g(3);
    g << -1, -2, -1;
    QpProblem<double> prob(MatrixXd::Identity(2, 2), VectorXd::Zero(2), m, g);
    const auto sol = enumerate_active_sets(prob);
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.theta(0) == doctest::Approx(-1.0));
    CHECK(sol.theta(1) == doctest::Approx(-1.0));
  }
  SUBCASE("matches the active-set solver") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
      const Index n = rng.integer(1, 4), p = rng.integer(1, 12);
      const RawQp raw = imuqp::testing::random_feasible_qp(rng, n, p);
      const auto prob = raw.problem();
      const auto mine = solve(prob);
      const auto ref = enumerate_active_sets(prob);
      REQUIRE(ref.status == Status::Optimal);
      CHECK((mine.theta - ref.theta).norm() <= 1e-7);
      CHECK(objective_value(prob, mine.theta) == doctest::Approx(objective_value(prob, ref.theta)).epsilon(1e-8));
    }
  }
}

TEST_CASE("primal active-set oracle") {
  Rng rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = rng.integer(1, 6), p = rng.integer(1, 16);
    RawQp raw = imuqp::testing::random_feasible_qp(rng, n, p);
    // shift so theta = 0 is feasible
    raw.gamma = raw.gamma.cwiseMax(0.0);
    const auto prob = raw.problem();
    const auto ref = primal_active_set_solve(prob, VectorXd::Zero(n));
    REQUIRE(ref.status == Status::Optimal);
    const auto en = enumerate_active_sets(prob);
    CHECK((ref.theta - en.theta).norm() <= 1e-8);
  }
  QpProblem<double> bad(MatrixXd::Identity(1, 1), VectorXd::Zero(1), MatrixXd::Identity(1, 1),
                        VectorXd::Constant(1, -1.0));
  CHECK_THROWS_AS(primal_active_set_solve(bad, VectorXd::Zero(1)), Error);
}
