#pragma once

#include <algorithm>
#include <optional>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "imuqp/qp_problem.hpp"

namespace imuqp {

enum class Status { Optimal, Infeasible, IterationLimit, CycleGuardTripped };

inline const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::IterationLimit: return "iteration_limit";
    case Status::CycleGuardTripped: return "cycle_guard";
  }
  return "unknown";
}

/// Which active constraint leaves the set.
///
/// MostNegative drops argmin lambda after an add (argmax y on a dependent
/// add) and jumps straight to the new equality solution. It can revisit
/// active sets and run into the iteration cap.
///
/// RatioTest walks from the last dual-feasible multipliers toward the new
/// equality solution and drops whichever multiplier reaches zero first, so
/// the dual objective never decreases. Both return the same optimum.
enum class DropRule { MostNegative, RatioTest };

struct SolverOptions {
  /// Linear-dependence threshold on q = h - h^T H_A^-1 h.
  double eps_q = 1e-11;
  /// Iteration cap; defaults to 3p when unset.
  std::optional<Index> max_iter;
  /// The repeated-index guard counts as a clean exit when the offending
  /// violation is within guard_tolerance * (1 + |gamma|_inf); otherwise the
  /// solve reports CycleGuardTripped.
  double guard_tolerance = 1e-7;
  DropRule drop_rule = DropRule::RatioTest;
};

/// t_l, t_a, t_r in the operation-count model.
struct EventCounts {
  Index dependent_adds = 0;
  Index independent_adds = 0;
  Index removals = 0;
};

template <typename Scalar>
struct QpSolution {
  VecX<Scalar> theta;
  VecX<Scalar> lambda_active;
  std::vector<Index> active;
  Index c_star = 0;
  Index m_star = 0;
  Status status = Status::Optimal;
  EventCounts events;
  /// Number of times the repeated-index guard fired on a roundoff-level violation.
  Index guard_hits = 0;
  /// Set when status is Infeasible: q and the dependence weights y of the
  /// rejected constraint (y is empty when the active set was empty).
  Scalar certificate_q = Scalar(0);
  VecX<Scalar> certificate_y;
  Index rejected_constraint = -1;
};

/// Multipliers scattered to full length p (zero for inactive constraints).
template <typename Scalar>
VecX<Scalar> full_multipliers(const QpSolution<Scalar>& sol, Index p) {
  VecX<Scalar> lambda = VecX<Scalar>::Zero(p);
  for (Index r = 0; r < sol.c_star; ++r) lambda(sol.active[r]) = sol.lambda_active(r);
  return lambda;
}

/**
 * Preallocated active-set state. Only the leading c entries of `active` and
 * `lambda`, and the leading c x c block of `h_inv`, are meaningful.
 * Exclusively owned by one solve at a time.
 */
template <typename Scalar>
struct SolverWorkspace {
  SolverWorkspace(Index n, Index p, Index capacity)
      : active(static_cast<std::size_t>(capacity), -1),
        h_inv(MatX<Scalar>::Zero(capacity, capacity)),
        lambda(VecX<Scalar>::Zero(capacity)),
        k0(VecX<Scalar>::Zero(p)),
        k(VecX<Scalar>::Zero(p)),
        theta0(VecX<Scalar>::Zero(n)),
        mu(VecX<Scalar>::Zero(capacity)),
        y(VecX<Scalar>::Zero(capacity)),
        hvec(VecX<Scalar>::Zero(capacity)) {}

  explicit SolverWorkspace(const QpProblem<Scalar>& prob)
      : SolverWorkspace(prob.num_variables(), prob.num_constraints(), prob.capacity()) {}

  Index capacity() const { return h_inv.rows(); }
  auto inverse_block() const { return h_inv.topLeftCorner(c, c); }
  auto multipliers() const { return lambda.head(c); }
  bool contains(Index j) const {
    return std::find(active.begin(), active.begin() + c, j) != active.begin() + c;
  }

  std::vector<Index> active;
  Index c = 0;
  MatX<Scalar> h_inv;
  VecX<Scalar> lambda;
  VecX<Scalar> k0;
  VecX<Scalar> k;
  VecX<Scalar> theta0;
  Index iterations = 0;
  EventCounts events;
  // last dual-feasible multipliers on the current active list (RatioTest only)
  VecX<Scalar> mu;

  // scratch for the dependence check; y is valid in its first c entries
  VecX<Scalar> y;
  VecX<Scalar> hvec;
};

// Solver instrumentation. Observers are called after every active-set change
// and after each recomputation of the violation vector.
enum class EventKind { Added, Swapped, Removed, ViolationUpdated };

struct SolverEvent {
  EventKind kind;
  Index constraint;
};

struct NullObserver {
  template <typename Workspace>
  void operator()(const SolverEvent&, const Workspace&) const {}
};

namespace detail {

template <typename Vector>
Index argmin_first(const Vector& v, Index len) {
  Index best = 0;
  for (Index i = 1; i < len; ++i)
    if (v(i) < v(best)) best = i;
  return best;
}

template <typename Vector>
Index argmax_first(const Vector& v, Index len) {
  Index best = 0;
  for (Index i = 1; i < len; ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

// Fills ws.hvec and ws.y for candidate j against the current active set and
// returns q.
template <typename Vector>
void erase_entry(Vector& v, Index i, Index len) {
  for (Index r = i; r + 1 < len; ++r) v(r) = v(r + 1);
  v(len - 1) = 0;
}

template <typename Scalar>
Scalar dependence_into(SolverWorkspace<Scalar>& ws, const QpProblem<Scalar>& prob, Index j) {
  const auto& h = prob.dual_h();
  const Index c = ws.c;
  for (Index r = 0; r < c; ++r) ws.hvec(r) = h(ws.active[r], j);
  ws.y.head(c).noalias() = ws.h_inv.topLeftCorner(c, c) * ws.hvec.head(c);
  return h(j, j) - ws.hvec.head(c).dot(ws.y.head(c));
}

// Border the inverse with constraint j, using ws.hvec / ws.y / q from
// dependence_into (or nothing when c == 0).
template <typename Scalar>
void aimu_apply(SolverWorkspace<Scalar>& ws, Index j, Scalar q) {
  const Index c = ws.c;
  if (c >= ws.capacity()) {
    throw Error(Errc::CapacityExceeded, "active set would exceed capacity " +
                                            std::to_string(ws.capacity()));
  }
  // k + h^T lambda_old is the current violation of constraint j
  const Scalar viol = ws.k0(j) + ws.hvec.head(c).dot(ws.lambda.head(c));
  const Scalar inv_q = Scalar(1) / q;
  if (c > 0) {
    auto y = ws.y.head(c);
    ws.h_inv.topLeftCorner(c, c).noalias() += inv_q * y * y.transpose();
    ws.h_inv.col(c).head(c) = -inv_q * y;
    ws.h_inv.row(c).head(c) = ws.h_inv.col(c).head(c).transpose();
    ws.lambda.head(c) += (viol * inv_q) * y;
  }
  ws.h_inv(c, c) = inv_q;
  ws.lambda(c) = -inv_q * viol;
  ws.active[c] = j;
  ws.c = c + 1;
}

}  // namespace detail

/// theta0 = -E^-1 F.
template <typename Scalar>
VecX<Scalar> unconstrained_solution(const QpProblem<Scalar>& prob) {
  VecX<Scalar> theta0 = -prob.grad();
  solve_inplace(prob.factored(), theta0);
  return theta0;
}

/// K0 = gamma - M theta0; negative entries are violated constraints.
template <typename Scalar>
VecX<Scalar> initial_violation(const QpProblem<Scalar>& prob, const VecX<std::type_identity_t<Scalar>>& theta0) {
  detail::require_dims(theta0.size() == prob.num_variables(), "initial_violation: theta length");
  return prob.bounds() - prob.constraints() * theta0;
}

template <typename Scalar>
Scalar objective_value(const QpProblem<Scalar>& prob, const VecX<std::type_identity_t<Scalar>>& theta) {
  detail::require_dims(theta.size() == prob.num_variables(), "objective_value: theta length");
  return Scalar(0.5) * theta.dot(prob.hessian() * theta) + theta.dot(prob.grad());
}

/// Resets the workspace for `prob`: theta0, K0, empty active set, m = 1.
template <typename Scalar>
void initialize(SolverWorkspace<Scalar>& ws, const QpProblem<Scalar>& prob) {
  detail::require_dims(ws.k0.size() == prob.num_constraints() &&
                           ws.theta0.size() == prob.num_variables(),
                       "workspace does not match problem");
  ws.theta0 = unconstrained_solution(prob);
  ws.k0 = initial_violation(prob, ws.theta0);
  ws.k = ws.k0;
  ws.c = 0;
  ws.iterations = 1;
  ws.events = {};
  ws.h_inv.setZero();
  ws.lambda.setZero();
  ws.mu.setZero();
}

template <typename Scalar>
struct DependenceResult {
  Scalar q;
  VecX<Scalar> y;
};

/// y = H_A^-1 h and q = h_jj - h^T y for candidate j. q vanishes exactly
/// when row j of M is a combination of the active rows (weights y).
template <typename Scalar>
DependenceResult<Scalar> dependence_check(SolverWorkspace<Scalar>& ws,
                                          const QpProblem<Scalar>& prob, Index j) {
  if (j < 0 || j >= prob.num_constraints()) throw Error(Errc::IndexOutOfRange, "dependence_check");
  const Scalar q = detail::dependence_into(ws, prob, j);
  return {q, ws.y.head(ws.c)};
}

/// Additive inverse update: append constraint j to the active set and update
/// H_A^-1 and lambda_A by bordering. Requires initialize() to have run.
template <typename Scalar>
void aimu(SolverWorkspace<Scalar>& ws, const QpProblem<Scalar>& prob, Index j) {
  if (j < 0 || j >= prob.num_constraints()) throw Error(Errc::IndexOutOfRange, "aimu: constraint index");
  if (ws.contains(j)) throw Error(Errc::InvalidArgument, "aimu: constraint already active");
  const Scalar q = detail::dependence_into(ws, prob, j);
  if (!(q > Scalar(0))) {
    throw Error(Errc::InvalidArgument, "aimu: constraint is linearly dependent on the active set");
  }
  detail::aimu_apply(ws, j, q);
}

/// Subtractive inverse update: drop entry i (position in the active list)
/// and compact the buffers.
template <typename Scalar>
void simu(SolverWorkspace<Scalar>& ws, Index i) {
  const Index c = ws.c;
  if (i < 0 || i >= c) throw Error(Errc::IndexOutOfRange, "simu: position outside active set");
  const Scalar hii = ws.h_inv(i, i);
  const Scalar li = ws.lambda(i);
  const Index tail = c - i - 1;

  // gather the removed column (without its diagonal) into scratch
  auto v = ws.y.head(c - 1);
  v.head(i) = ws.h_inv.col(i).head(i);
  v.tail(tail) = ws.h_inv.col(i).segment(i + 1, tail);

  if (tail > 0) {
    ws.h_inv.block(i, 0, tail, c) = ws.h_inv.block(i + 1, 0, tail, c).eval();
    ws.h_inv.block(0, i, c - 1, tail) = ws.h_inv.block(0, i + 1, c - 1, tail).eval();
    ws.lambda.segment(i, tail) = ws.lambda.segment(i + 1, tail).eval();
    std::copy(ws.active.begin() + i + 1, ws.active.begin() + c, ws.active.begin() + i);
  }
  ws.h_inv.row(c - 1).head(c).setZero();
  ws.h_inv.col(c - 1).head(c).setZero();
  ws.lambda(c - 1) = Scalar(0);
  ws.active[c - 1] = -1;
  ws.c = c - 1;

  if (c > 1) {
    ws.h_inv.topLeftCorner(c - 1, c - 1).noalias() -= (Scalar(1) / hii) * v * v.transpose();
    ws.lambda.head(c - 1) -= (li / hii) * v;
  }
}

/// K = K0 + H(:, A) lambda_A.
template <typename Scalar>
void update_violation(SolverWorkspace<Scalar>& ws, const QpProblem<Scalar>& prob) {
  ws.k = ws.k0;
  for (Index r = 0; r < ws.c; ++r) ws.k.noalias() += ws.lambda(r) * prob.dual_h().col(ws.active[r]);
}

/// theta = theta0 - E^-1 M_A^T lambda_A for the workspace's current active set.
template <typename Scalar>
VecX<Scalar> current_iterate(const QpProblem<Scalar>& prob, const SolverWorkspace<Scalar>& ws) {
  VecX<Scalar> kappa = VecX<Scalar>::Zero(prob.num_variables());
  for (Index r = 0; r < ws.c; ++r)
    kappa.noalias() += ws.lambda(r) * prob.constraints().row(ws.active[r]).transpose();
  solve_inplace(prob.factored(), kappa);
  return ws.theta0 - kappa;
}

/**
 * Active-set QP solve with inverse updates.
 *
 * Adds the most violated constraint, removes the most negative multiplier,
 * and keeps H_A^-1 and lambda_A current with bordering / rank-one updates.
 * A violated constraint whose row depends linearly on the active rows either
 * replaces the active constraint with the largest dependence weight, or, if
 * no weight is positive, proves the QP infeasible.
 */
template <typename Scalar, typename Observer = NullObserver>
QpSolution<Scalar> solve(const QpProblem<Scalar>& prob, SolverWorkspace<Scalar>& ws,
                         const SolverOptions& opts = {}, Observer&& observer = {}) {
  const Index p = prob.num_constraints();
  const auto& h = prob.dual_h();
  const Scalar eps_q = Scalar(opts.eps_q);
  const Index max_iter = opts.max_iter.value_or(3 * p);
  const bool ratio = opts.drop_rule == DropRule::RatioTest;

  initialize(ws, prob);
  QpSolution<Scalar> sol;
  sol.status = Status::Optimal;

  Index j = p > 0 ? detail::argmin_first(ws.k0, p) : 0;
  Scalar k_min = p > 0 ? ws.k0(j) : Scalar(0);
  Index& m = ws.iterations;

  if (p > 0 && k_min < Scalar(0)) {
    using std::abs;
    const Scalar guard_tol =
        Scalar(opts.guard_tolerance) * (Scalar(1) + prob.bounds().cwiseAbs().maxCoeff());

    while (k_min < Scalar(0)) {
      if (ws.contains(j)) {
        if (-k_min <= guard_tol) {
          ++sol.guard_hits;
        } else {
          sol.status = Status::CycleGuardTripped;
        }
        break;
      }
      if (m >= max_iter) {
        sol.status = Status::IterationLimit;
        break;
      }
      ++m;

      if (ws.c == 0) {
        const Scalar hjj = h(j, j);
        if (!(hjj > eps_q)) {
          // a zero row of M with a negative bound
          sol.status = Status::Infeasible;
          sol.certificate_q = hjj;
          sol.certificate_y.resize(0);
          sol.rejected_constraint = j;
          break;
        }
        detail::aimu_apply(ws, j, hjj);
        ws.mu(0) = Scalar(0);
        ++ws.events.independent_adds;
        observer(SolverEvent{EventKind::Added, j}, std::as_const(ws));
      } else {
        const Scalar q = detail::dependence_into(ws, prob, j);
        if (q <= eps_q) {
          Index f = detail::argmax_first(ws.y, ws.c);
          if (ws.y(f) <= Scalar(0)) {
            sol.status = Status::Infeasible;
            sol.certificate_q = q;
            sol.certificate_y = ws.y.head(ws.c);
            sol.rejected_constraint = j;
            break;
          }
          // raising lambda_j by t lowers lambda_A by t y
          Scalar t = Scalar(0);
          if (ratio) {
            for (Index r = 0; r < ws.c; ++r)
              if (ws.y(r) > Scalar(0) && ws.mu(r) * ws.y(f) < ws.mu(f) * ws.y(r)) f = r;
            t = ws.mu(f) / ws.y(f);
            ws.mu.head(ws.c) = (ws.mu.head(ws.c) - t * ws.y.head(ws.c)).cwiseMax(Scalar(0));
            detail::erase_entry(ws.mu, f, ws.c);
          }
          simu(ws, f);
          const Scalar q_swap = detail::dependence_into(ws, prob, j);
          if (!(q_swap > Scalar(0))) {
            sol.status = Status::CycleGuardTripped;
            break;
          }
          detail::aimu_apply(ws, j, q_swap);
          ws.mu(ws.c - 1) = t;
          ++ws.events.dependent_adds;
          observer(SolverEvent{EventKind::Swapped, j}, std::as_const(ws));
        } else {
          detail::aimu_apply(ws, j, q);
          ws.mu(ws.c - 1) = Scalar(0);
          ++ws.events.independent_adds;
          observer(SolverEvent{EventKind::Added, j}, std::as_const(ws));
        }
      }

      bool hit_limit = false;
      while (ws.c > 0) {
        Index i = detail::argmin_first(ws.lambda, ws.c);
        if (!(ws.lambda(i) < Scalar(0))) break;
        if (m >= max_iter) {
          hit_limit = true;
          break;
        }
        ++m;
        if (ratio) {
          // step along mu -> lambda until the first multiplier hits zero
          Scalar t_best = Scalar(2);
          for (Index r = 0; r < ws.c; ++r) {
            if (!(ws.lambda(r) < Scalar(0))) continue;
            const Scalar t = ws.mu(r) / (ws.mu(r) - ws.lambda(r));
            if (t < t_best) {
              t_best = t;
              i = r;
            }
          }
          ws.mu.head(ws.c) =
              (ws.mu.head(ws.c) + t_best * (ws.lambda.head(ws.c) - ws.mu.head(ws.c))).cwiseMax(Scalar(0));
          detail::erase_entry(ws.mu, i, ws.c);
        }
        const Index removed = ws.active[i];
        simu(ws, i);
        ++ws.events.removals;
        observer(SolverEvent{EventKind::Removed, removed}, std::as_const(ws));
      }
      if (hit_limit) {
        sol.status = Status::IterationLimit;
        break;
      }
      ws.mu.head(ws.c) = ws.lambda.head(ws.c);

      update_violation(ws, prob);
      observer(SolverEvent{EventKind::ViolationUpdated, -1}, std::as_const(ws));
      j = detail::argmin_first(ws.k, p);
      k_min = ws.k(j);
    }
  }

  sol.theta = current_iterate(prob, ws);
  sol.c_star = ws.c;
  sol.lambda_active = ws.lambda.head(ws.c);
  sol.active.assign(ws.active.begin(), ws.active.begin() + ws.c);
  sol.m_star = m;
  sol.events = ws.events;
  return sol;
}

template <typename Scalar>
QpSolution<Scalar> solve(const QpProblem<Scalar>& prob, const SolverOptions& opts = {}) {
  SolverWorkspace<Scalar> ws(prob);
  return solve(prob, ws, opts);
}

}  // namespace imuqp
