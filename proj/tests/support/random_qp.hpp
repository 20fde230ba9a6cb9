#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "imuqp/qp_problem.hpp"

namespace imuqp::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
  }
  Index integer(Index lo, Index hi) {
    return lo + static_cast<Index>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  MatrixXd matrix(Index r, Index c, double lo = -1.0, double hi = 1.0) {
    MatrixXd m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = uniform(lo, hi);
    return m;
  }
  VectorXd vector(Index n, double lo = -1.0, double hi = 1.0) { return matrix(n, 1, lo, hi); }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline MatrixXd random_spd(Rng& rng, Index n) {
  const MatrixXd a = rng.matrix(n, n);
  MatrixXd e = a * a.transpose() + 0.5 * MatrixXd::Identity(n, n);
  return 0.5 * (e + e.transpose());
}

/// Orthogonal matrix from QR of a random square matrix.
inline MatrixXd random_rotation(Rng& rng, Index n) {
  Eigen::HouseholderQR<MatrixXd> qr(rng.matrix(n, n));
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

struct RawQp {
  MatrixXd e;
  VectorXd f;
  MatrixXd m;
  VectorXd gamma;

  QpProblem<double> problem() const { return QpProblem<double>(e, f, m, gamma); }
};

/// gamma = M theta_f + s with s >= 0, so theta_f is feasible. Some rows are
/// copies or scaled copies of earlier rows so linearly dependent candidates
/// turn up during the solve.
inline RawQp random_feasible_qp(Rng& rng, Index n, Index p, double dup_prob = 0.15) {
  RawQp q;
  q.e = random_spd(rng, n);
  q.f = rng.vector(n, -6.0, 6.0);
  q.m = rng.matrix(p, n);
  for (Index i = 1; i < p; ++i) {
    if (rng.uniform(0, 1) < dup_prob) q.m.row(i) = rng.uniform(0.5, 2.0) * q.m.row(rng.integer(0, i - 1));
  }
  const VectorXd theta_f = rng.vector(n);
  q.gamma = q.m * theta_f + rng.vector(p, 0.0, 1.0);
  return q;
}

/// Three constraints -a1 t1 + t2 <= 0, a2 t1 + t2 <= 0, -t2 <= -eps in a
/// rotated and shifted frame, rows shuffled: a wedge pointing down and a
/// half plane above it. Extra coordinates beyond the first two are free.
inline RawQp random_infeasible_qp(Rng& rng, Index n) {
  const double a1 = rng.uniform(0.2, 3.0);
  const double a2 = rng.uniform(0.2, 3.0);
  const double eps = rng.uniform(0.05, 2.0);
  MatrixXd base = MatrixXd::Zero(3, n);
  base.row(0).head(2) << -a1, 1.0;
  base.row(1).head(2) << a2, 1.0;
  base.row(2).head(2) << 0.0, -1.0;
  VectorXd b(3);
  b << 0.0, 0.0, -eps;

  const MatrixXd rot = random_rotation(rng, n);
  const VectorXd center = rng.vector(n, -2.0, 2.0);
  // theta = center + rot * phi, so base * phi <= b becomes (base rot^T) theta <= b + base rot^T center
  const MatrixXd m = base * rot.transpose();
  const VectorXd g = b + m * center;

  std::vector<Index> order(3);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  RawQp q;
  q.e = random_spd(rng, n);
  q.f = rng.vector(n, -4.0, 4.0);
  q.m.resize(3, n);
  q.gamma.resize(3);
  for (Index i = 0; i < 3; ++i) {
    q.m.row(i) = m.row(order[static_cast<std::size_t>(i)]);
    q.gamma(i) = g(order[static_cast<std::size_t>(i)]);
  }
  return q;
}

inline MatrixXd explicit_dual_block(const QpProblem<double>& prob, const std::vector<Index>& active) {
  const Index c = static_cast<Index>(active.size());
  MatrixXd ma(c, prob.num_variables());
  for (Index r = 0; r < c; ++r) ma.row(r) = prob.constraints().row(active[static_cast<std::size_t>(r)]);
  return ma * prob.hessian().inverse() * ma.transpose();
}

}  // namespace imuqp::testing
