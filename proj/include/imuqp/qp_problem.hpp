#pragma once

#include <algorithm>
#include <memory>
#include <optional>

#include "imuqp/dense_linalg.hpp"

namespace imuqp {

/// The constant part of a QP: Hessian, its factors, the constraint matrix and
/// the dual Hessian. In MPC use this is built once offline and shared by the
/// per-step problems.
template <typename Scalar>
struct QpStructure {
  MatX<Scalar> hessian;            // E
  FactoredSpd<Scalar> factored;    // E = (E_L + I) E_U
  MatX<Scalar> constraints;        // M, p x n
  MatX<Scalar> dual_h;             // H = M E^-1 M^T, p x p
  Index capacity = 0;              // active-set buffer size

  Index num_variables() const { return hessian.rows(); }
  Index num_constraints() const { return constraints.rows(); }
};

/// Workspace capacity for a general QP: more than n linearly independent
/// constraints cannot be active, plus one slot for the dependent-swap transient.
inline Index default_capacity(Index n, Index p) { return std::min(p, n + 1); }

template <typename Scalar>
std::shared_ptr<const QpStructure<Scalar>> make_structure(
    const MatX<Scalar>& e, const MatX<Scalar>& m, std::optional<Index> capacity = std::nullopt) {
  detail::require_dims(e.rows() == e.cols(), "QP Hessian must be square");
  detail::require_dims(m.cols() == e.rows() || m.rows() == 0,
                       "constraint matrix column count must equal variable count");
  auto s = std::make_shared<QpStructure<Scalar>>();
  s->hessian = e;
  s->factored = factorize_spd(e);
  s->constraints = m.rows() == 0 ? MatX<Scalar>(0, e.rows()) : m;
  s->dual_h = dual_hessian(s->factored, s->constraints);
  s->capacity = capacity.value_or(default_capacity(e.rows(), s->constraints.rows()));
  if (s->capacity < 0 || s->capacity > s->constraints.rows()) {
    throw Error(Errc::InvalidArgument, "active-set capacity must lie in [0, p]");
  }
  return s;
}

/// Builds a structure around a precomputed dual Hessian. The diagonal and the
/// first row are recomputed and compared as a spot check.
template <typename Scalar>
std::shared_ptr<const QpStructure<Scalar>> make_structure(
    const MatX<Scalar>& e, const MatX<Scalar>& m, const MatX<Scalar>& h,
    std::optional<Index> capacity = std::nullopt) {
  auto s = std::make_shared<QpStructure<Scalar>>();
  s->hessian = e;
  s->factored = factorize_spd(e);
  s->constraints = m;
  detail::require_dims(m.cols() == e.rows(), "constraint matrix column count");
  detail::require_dims(h.rows() == m.rows() && h.cols() == m.rows(), "dual Hessian shape");
  s->dual_h = h;
  s->capacity = capacity.value_or(default_capacity(e.rows(), m.rows()));

  const Index p = m.rows();
  if (p > 0) {
    using std::abs;
    const Scalar scale = Scalar(1) + h.cwiseAbs().maxCoeff();
    VecX<Scalar> eta = solve(s->factored, m.row(0).transpose());
    VecX<Scalar> row0 = m * eta;
    for (Index j = 0; j < p; ++j) {
      VecX<Scalar> ej = solve(s->factored, m.row(j).transpose());
      const Scalar diag = m.row(j).dot(ej);
      if (abs(diag - h(j, j)) > Scalar(1e-9) * scale || abs(row0(j) - h(0, j)) > Scalar(1e-9) * scale) {
        throw Error(Errc::InvalidArgument, "dual Hessian does not match M E^-1 M^T");
      }
    }
  }
  return s;
}

/**
 * min 1/2 theta^T E theta + theta^T F  s.t.  M theta <= gamma.
 *
 * The gradient and bounds vary per instance; everything else lives in a shared
 * immutable QpStructure.
 */
template <typename Scalar>
class QpProblem {
 public:
  QpProblem(std::shared_ptr<const QpStructure<Scalar>> structure, VecX<Scalar> grad,
            VecX<Scalar> bounds)
      : structure_(std::move(structure)), grad_(std::move(grad)), bounds_(std::move(bounds)) {
    detail::require_dims(structure_ != nullptr, "QpProblem: null structure");
    detail::require_dims(grad_.size() == structure_->num_variables(), "QpProblem: gradient length");
    detail::require_dims(bounds_.size() == structure_->num_constraints(), "QpProblem: bound length");
  }

  QpProblem(const MatX<Scalar>& e, const VecX<Scalar>& grad, const MatX<Scalar>& m,
            const VecX<Scalar>& bounds)
      : QpProblem(make_structure(e, m), grad, bounds) {}

  Index num_variables() const { return structure_->num_variables(); }
  Index num_constraints() const { return structure_->num_constraints(); }
  Index capacity() const { return structure_->capacity; }

  const MatX<Scalar>& hessian() const { return structure_->hessian; }
  const FactoredSpd<Scalar>& factored() const { return structure_->factored; }
  const MatX<Scalar>& constraints() const { return structure_->constraints; }
  const MatX<Scalar>& dual_h() const { return structure_->dual_h; }
  const VecX<Scalar>& grad() const { return grad_; }
  const VecX<Scalar>& bounds() const { return bounds_; }
  const std::shared_ptr<const QpStructure<Scalar>>& structure() const { return structure_; }

 private:
  std::shared_ptr<const QpStructure<Scalar>> structure_;
  VecX<Scalar> grad_;
  VecX<Scalar> bounds_;
};

}  // namespace imuqp
