#pragma once

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "imuqp/solver.hpp"

// Oracles used to cross-check the active-set solver. None of them touch the
// packed factors, the precomputed dual Hessian or the inverse updates.

namespace imuqp {

struct HildrethOptions {
  double tol = 1e-7;  // delta
  Index max_iter = 38;
};

namespace detail {

template <typename Scalar>
struct DualData {
  Eigen::LLT<MatX<Scalar>> llt;
  VecX<Scalar> theta0;
  VecX<Scalar> k0;
  MatX<Scalar> e_inv_mt;  // E^-1 M^T
  MatX<Scalar> h;         // M E^-1 M^T
};

template <typename Scalar>
DualData<Scalar> dual_data(const QpProblem<Scalar>& prob) {
  DualData<Scalar> d;
  d.llt.compute(prob.hessian());
  if (d.llt.info() != Eigen::Success) {
    throw Error(Errc::NotPositiveDefinite, "oracle: Hessian is not positive definite");
  }
  d.theta0 = -d.llt.solve(prob.grad());
  d.k0 = prob.bounds() - prob.constraints() * d.theta0;
  d.e_inv_mt = d.llt.solve(prob.constraints().transpose());
  d.h = prob.constraints() * d.e_inv_mt;
  return d;
}

template <typename Scalar>
QpSolution<Scalar> finish_from_multipliers(const QpProblem<Scalar>& prob, const DualData<Scalar>& d,
                                           const VecX<Scalar>& lambda) {
  QpSolution<Scalar> sol;
  sol.theta = d.theta0 - d.e_inv_mt * lambda;
  std::vector<Scalar> vals;
  for (Index i = 0; i < prob.num_constraints(); ++i) {
    if (lambda(i) != Scalar(0)) {
      sol.active.push_back(i);
      vals.push_back(lambda(i));
    }
  }
  sol.c_star = static_cast<Index>(sol.active.size());
  sol.lambda_active = Eigen::Map<const VecX<Scalar>>(vals.data(), sol.c_star);
  return sol;
}

}  // namespace detail

/// Hildreth's dual coordinate ascent (Gauss-Seidel, projected onto lambda >= 0).
/// m_star holds the number of sweeps. Does not detect infeasibility.
template <typename Scalar>
QpSolution<Scalar> hildreth_solve(const QpProblem<Scalar>& prob, const HildrethOptions& opts = {}) {
  if (!(opts.tol > 0) || opts.max_iter < 1) {
    throw Error(Errc::InvalidArgument, "hildreth_solve: tol must be > 0 and max_iter >= 1");
  }
  const auto d = detail::dual_data(prob);
  const Index p = prob.num_constraints();
  VecX<Scalar> lambda = VecX<Scalar>::Zero(p);
  const Scalar tiny = Scalar(1e-14) * (Scalar(1) + (p > 0 ? d.h.diagonal().cwiseAbs().maxCoeff() : Scalar(0)));

  bool converged = p == 0 || (d.k0.array() >= 0).all();
  Index sweeps = 0;
  while (!converged && sweeps < opts.max_iter) {
    ++sweeps;
    Scalar change = 0;
    for (Index i = 0; i < p; ++i) {
      const Scalar hii = d.h(i, i);
      if (!(hii > tiny)) continue;
      const Scalar w = d.k0(i) + d.h.row(i).dot(lambda) - hii * lambda(i);
      const Scalar next = std::max(Scalar(0), -w / hii);
      change = std::max(change, Scalar(std::abs(next - lambda(i))));
      lambda(i) = next;
    }
    converged = change < Scalar(opts.tol);
  }

  auto sol = detail::finish_from_multipliers(prob, d, lambda);
  sol.m_star = sweeps;
  sol.status = converged ? Status::Optimal : Status::IterationLimit;
  return sol;
}

inline constexpr Index kEnumMaxConstraints = 16;
inline constexpr Index kEnumMaxVariables = 6;

/**
 * Exhaustive KKT enumeration over active sets of size <= n with full row
 * rank. Returns the feasible, dual-feasible candidate of least objective, or
 * Infeasible when no candidate exists and no minimal face of the feasible set
 * exists either. m_star holds the number of subsets examined.
 */
template <typename Scalar>
QpSolution<Scalar> enumerate_active_sets(const QpProblem<Scalar>& prob) {
  const Index n = prob.num_variables();
  const Index p = prob.num_constraints();
  if (p > kEnumMaxConstraints || n > kEnumMaxVariables) {
    throw Error(Errc::SizeLimit, "enumerate_active_sets: requires p <= 16 and n <= 6");
  }
  const auto d = detail::dual_data(prob);
  const auto& m = prob.constraints();
  const auto& gamma = prob.bounds();
  const Scalar gscale = Scalar(1) + (p > 0 ? gamma.cwiseAbs().maxCoeff() : Scalar(0));
  const Scalar hscale = Scalar(1) + (p > 0 ? d.h.diagonal().cwiseAbs().maxCoeff() : Scalar(0));
  const Scalar feas_tol = Scalar(1e-10) * gscale;
  const Scalar rank_tol = Scalar(1e-10) * hscale;

  auto objective = [&](const VecX<Scalar>& th) {
    return Scalar(0.5) * th.dot(prob.hessian() * th) + th.dot(prob.grad());
  };

  // Cholesky of H_A with each pivot read as the Schur complement q of the
  // next row against the earlier ones; a small pivot means dependent rows.
  auto full_rank = [&](const std::vector<Index>& idx, MatX<Scalar>& lfac) {
    const Index c = static_cast<Index>(idx.size());
    lfac.setZero(c, c);
    for (Index r = 0; r < c; ++r) {
      for (Index s = 0; s <= r; ++s) {
        Scalar acc = d.h(idx[r], idx[s]);
        for (Index t = 0; t < s; ++t) acc -= lfac(r, t) * lfac(s, t);
        if (s == r) {
          if (!(acc > rank_tol)) return false;
          lfac(r, r) = std::sqrt(acc);
        } else {
          lfac(r, s) = acc / lfac(s, s);
        }
      }
    }
    return true;
  };

  QpSolution<Scalar> best;
  best.status = Status::Infeasible;
  Scalar best_obj = std::numeric_limits<Scalar>::infinity();
  Index examined = 0;

  std::vector<Index> idx;
  MatX<Scalar> lfac;
  const std::uint32_t limit = std::uint32_t(1) << p;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    idx.clear();
    for (Index i = 0; i < p; ++i)
      if (mask & (std::uint32_t(1) << i)) idx.push_back(i);
    const Index c = static_cast<Index>(idx.size());
    if (c > n) continue;
    ++examined;
    if (!full_rank(idx, lfac)) continue;

    VecX<Scalar> k_a(c);
    for (Index r = 0; r < c; ++r) k_a(r) = d.k0(idx[r]);
    VecX<Scalar> lam = -k_a;
    lfac.template triangularView<Eigen::Lower>().solveInPlace(lam);
    lfac.transpose().template triangularView<Eigen::Upper>().solveInPlace(lam);

    if (c > 0 && lam.minCoeff() < Scalar(-1e-10) * hscale) continue;
    VecX<Scalar> th = d.theta0;
    for (Index r = 0; r < c; ++r) th.noalias() -= lam(r) * d.e_inv_mt.col(idx[r]);
    if (p > 0 && ((m * th - gamma).array() > feas_tol).any()) continue;

    const Scalar obj = objective(th);
    if (obj < best_obj) {
      best_obj = obj;
      best.theta = th;
      best.lambda_active = lam.cwiseMax(Scalar(0));
      best.active = idx;
      best.c_star = c;
      best.status = Status::Optimal;
    }
  }
  best.m_star = examined;

  if (best.status == Status::Infeasible) {
    // Every nonempty polyhedron has a minimal face {M_A theta = gamma_A};
    // its least-norm point is feasible. Finding one here means the KKT
    // enumeration above missed the optimum.
    Scalar rank_tol_rows = Scalar(1e-10) * (Scalar(1) + (p > 0 ? m.cwiseAbs().maxCoeff() : Scalar(0)));
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      idx.clear();
      for (Index i = 0; i < p; ++i)
        if (mask & (std::uint32_t(1) << i)) idx.push_back(i);
      const Index c = static_cast<Index>(idx.size());
      if (c > n) continue;
      MatX<Scalar> ma(c, n);
      VecX<Scalar> ga(c);
      for (Index r = 0; r < c; ++r) {
        ma.row(r) = m.row(idx[r]);
        ga(r) = gamma(idx[r]);
      }
      VecX<Scalar> th = VecX<Scalar>::Zero(n);
      if (c > 0) {
        Eigen::FullPivLU<MatX<Scalar>> lu(ma * ma.transpose());
        lu.setThreshold(rank_tol_rows);
        if (!lu.isInvertible()) continue;
        th = ma.transpose() * lu.solve(ga);
      }
      if (((m * th - gamma).array() <= feas_tol).all()) {
        throw Error(Errc::OracleInconsistent,
                    "enumerate_active_sets: feasible point exists but no KKT candidate was found");
      }
    }
    best.theta = d.theta0;
    best.lambda_active.resize(0);
    best.active.clear();
    best.c_star = 0;
  }
  return best;
}

/**
 * Textbook primal active-set method from a feasible start. Each iteration
 * solves the equality-constrained subproblem with a fresh factorization of
 * the KKT matrix. Intended for problems too large to enumerate.
 * m_star holds the iteration count.
 */
template <typename Scalar>
QpSolution<Scalar> primal_active_set_solve(const QpProblem<Scalar>& prob, const VecX<std::type_identity_t<Scalar>>& theta_start,
                                           Index max_iter = 10000) {
  const Index n = prob.num_variables();
  const Index p = prob.num_constraints();
  detail::require_dims(theta_start.size() == n, "primal_active_set_solve: start length");
  const auto& e = prob.hessian();
  const auto& m = prob.constraints();
  const auto& gamma = prob.bounds();
  const Scalar gscale = Scalar(1) + (p > 0 ? gamma.cwiseAbs().maxCoeff() : Scalar(0));
  const Scalar feas_tol = Scalar(1e-9) * gscale;

  VecX<Scalar> th = theta_start;
  if (p > 0 && ((m * th - gamma).array() > feas_tol).any()) {
    throw Error(Errc::InvalidArgument, "primal_active_set_solve: start point is infeasible");
  }

  std::vector<Index> work;
  QpSolution<Scalar> sol;
  sol.status = Status::IterationLimit;
  VecX<Scalar> mu;
  Index iter = 0;
  while (iter < max_iter) {
    ++iter;
    const Index w = static_cast<Index>(work.size());
    MatX<Scalar> kkt = MatX<Scalar>::Zero(n + w, n + w);
    kkt.topLeftCorner(n, n) = e;
    for (Index r = 0; r < w; ++r) {
      kkt.block(n + r, 0, 1, n) = m.row(work[r]);
      kkt.block(0, n + r, n, 1) = m.row(work[r]).transpose();
    }
    VecX<Scalar> rhs = VecX<Scalar>::Zero(n + w);
    rhs.head(n) = -(e * th + prob.grad());
    const VecX<Scalar> sol_kkt = kkt.fullPivLu().solve(rhs);
    const VecX<Scalar> step = sol_kkt.head(n);
    mu = sol_kkt.tail(w);

    const Scalar step_tol = Scalar(1e-13) * (Scalar(1) + th.norm());
    if (step.norm() <= step_tol) {
      if (w == 0 || mu.minCoeff() >= Scalar(0)) {
        sol.status = Status::Optimal;
        break;
      }
      Index drop = 0;
      for (Index r = 1; r < w; ++r)
        if (mu(r) < mu(drop)) drop = r;
      work.erase(work.begin() + drop);
      continue;
    }

    Scalar alpha = 1;
    Index blocking = -1;
    for (Index i = 0; i < p; ++i) {
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      const Scalar rate = m.row(i).dot(step);
      if (rate <= Scalar(0)) continue;
      const Scalar room = std::max(Scalar(0), gamma(i) - m.row(i).dot(th));
      const Scalar a = room / rate;
      if (a < alpha) {
        alpha = a;
        blocking = i;
      }
    }
    th += alpha * step;
    if (blocking >= 0) work.push_back(blocking);
  }

  sol.theta = th;
  sol.active = work;
  sol.c_star = static_cast<Index>(work.size());
  sol.lambda_active = mu.size() == sol.c_star ? mu : VecX<Scalar>::Zero(sol.c_star);
  sol.m_star = iter;
  return sol;
}

}  // namespace imuqp
