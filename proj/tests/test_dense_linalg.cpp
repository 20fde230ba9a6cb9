#include <doctest.h>

#include "imuqp/dense_linalg.hpp"
#include "support/random_qp.hpp"

using namespace imuqp;
using imuqp::testing::Rng;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("identity factorizes to identity") {
  const auto f = factorize_spd(MatrixXd::Identity(3, 3));
  CHECK(f.packed().isApprox(MatrixXd::Identity(3, 3)));
}

TEST_CASE("hand-eliminated 2x2") {
  MatrixXd e(2, 2);
  e << 4, 2, 2, 3;
  const auto f = factorize_spd(e);
  CHECK(f.packed()(1, 0) == doctest::Approx(0.5));
  MatrixXd u(2, 2);
  u << 4, 2, 0, 2;
  CHECK((f.upper() - u).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((f.reconstruct() - e).cwiseAbs().maxCoeff() < 1e-15);

  VectorXd rhs(2);
  rhs << 2, 3;
  const VectorXd x = solve(f, rhs);
  CHECK(x(0) == doctest::Approx(0.0));
  CHECK(x(1) == doctest::Approx(1.0));
}

TEST_CASE("indefinite and asymmetric inputs are rejected") {
  MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  try {
    factorize_spd(swap);
    FAIL("expected PivotBreakdown");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PivotBreakdown);
  }
  MatrixXd asym(2, 2);
  asym << 2, 1, 0, 2;
  try {
    factorize_spd(asym);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotSymmetric);
  }
}

TEST_CASE("small solves") {
  const auto f = factorize_spd(MatrixXd::Identity(3, 3));
  VectorXd rhs(3);
  rhs << 1, 2, 3;
  CHECK(solve(f, rhs) == rhs);

  MatrixXd two(1, 1);
  two << 2;
  VectorXd r1(1);
  r1 << 2;
  CHECK(solve(factorize_spd(two), r1)(0) == doctest::Approx(1.0));

  VectorXd bad(2);
  CHECK_THROWS_AS(solve(f, bad), Error);
}

TEST_CASE("random SPD: reconstruction and residual bounds") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = rng.integer(1, 12);
    const MatrixXd e = imuqp::testing::random_spd(rng, n);
    const auto f = factorize_spd(e);
    const double norm = e.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK((f.reconstruct() - e).cwiseAbs().rowwise().sum().maxCoeff() <= 1e-10 * norm);
    CHECK((f.upper().diagonal().array() > 0).all());

    const VectorXd rhs = rng.vector(n, -5, 5);
    const VectorXd x = solve(f, rhs);
    CHECK((e * x - rhs).cwiseAbs().maxCoeff() <= 1e-9 * rhs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("dual Hessian") {
  SUBCASE("identity") {
    const auto f = factorize_spd(MatrixXd::Identity(2, 2));
    CHECK(dual_hessian(f, MatrixXd::Identity(2, 2)).isApprox(MatrixXd::Identity(2, 2)));
  }
  SUBCASE("scalar") {
    MatrixXd e(1, 1), m(1, 1);
    e << 2;
    m << 1;
    CHECK(dual_hessian(factorize_spd(e), m)(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("random 4x3 against the explicit inverse") {
    Rng rng(3);
    const MatrixXd m = rng.matrix(4, 3);
    const MatrixXd e = VectorXd::Map(std::vector<double>{1, 2, 4}.data(), 3).asDiagonal();
    const MatrixXd h = dual_hessian(factorize_spd(e), m);
    const MatrixXd brute = m * e.inverse() * m.transpose();
    CHECK((h - brute).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("symmetric and positive semidefinite") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const Index n = rng.integer(1, 6), p = rng.integer(1, 10);
      const MatrixXd h = dual_hessian(factorize_spd(imuqp::testing::random_spd(rng, n)), rng.matrix(p, n));
      const double scale = h.cwiseAbs().maxCoeff();
      CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * (1 + scale));
    }
  }
  SUBCASE("column mismatch") {
    const auto f = factorize_spd(MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(dual_hessian(f, MatrixXd::Ones(2, 2)), Error);
  }
}
