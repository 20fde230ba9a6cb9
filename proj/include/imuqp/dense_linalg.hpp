#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>

#include "imuqp/errors.hpp"

namespace imuqp {

using Index = Eigen::Index;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/**
 * LU factors of a symmetric positive-definite matrix E, obtained by Gaussian
 * elimination without pivoting and stored packed in one dense matrix:
 * the strictly lower part holds E_L (unit diagonal of L implied) and the
 * upper part including the diagonal holds E_U, so E = (E_L + I) E_U.
 *
 * Immutable once built; safe to share between threads.
 */
template <typename Scalar>
class FactoredSpd {
 public:
  FactoredSpd() = default;
  /// Wraps factors that are already packed as E_L + E_U.
  explicit FactoredSpd(MatX<Scalar> packed_lu) : packed_lu_(std::move(packed_lu)) {}

  Index size() const { return packed_lu_.rows(); }
  const MatX<Scalar>& packed() const { return packed_lu_; }

  MatX<Scalar> lower() const {
    return packed_lu_.template triangularView<Eigen::UnitLower>();
  }
  MatX<Scalar> upper() const {
    return packed_lu_.template triangularView<Eigen::Upper>();
  }
  MatX<Scalar> reconstruct() const { return lower() * upper(); }

 private:
  MatX<Scalar> packed_lu_;
};

inline constexpr double kDefaultPivotFloor = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-10;

/// Factorizes E in place of a copy. The upper triangle is taken as
/// authoritative after a relative symmetry check.
template <typename Derived>
FactoredSpd<typename Derived::Scalar> factorize_spd(
    const Eigen::MatrixBase<Derived>& e,
    typename Derived::Scalar pivot_floor = typename Derived::Scalar(kDefaultPivotFloor)) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  detail::require_dims(e.rows() == e.cols(), "factorize_spd: matrix must be square");
  const Index n = e.rows();
  if (n == 0) throw Error(Errc::InvalidArgument, "factorize_spd: empty matrix");

  const Scalar scale = e.cwiseAbs().maxCoeff();
  const Scalar asym = (e - e.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(kSymmetryTolerance) * scale) {
    throw Error(Errc::NotSymmetric, "factorize_spd: asymmetry exceeds tolerance");
  }

  MatX<Scalar> a = e.template triangularView<Eigen::Upper>();
  a.template triangularView<Eigen::StrictlyLower>() = e.transpose();

  for (Index k = 0; k < n; ++k) {
    const Scalar pivot = a(k, k);
    if (!(pivot > pivot_floor)) {
      throw Error(Errc::PivotBreakdown,
                  "factorize_spd: pivot " + std::to_string(static_cast<double>(pivot)) +
                      " at row " + std::to_string(k));
    }
    const Index rest = n - k - 1;
    if (rest == 0) break;
    a.col(k).tail(rest) /= pivot;
    a.bottomRightCorner(rest, rest).noalias() -=
        a.col(k).tail(rest) * a.row(k).tail(rest);
  }
  return FactoredSpd<Scalar>(std::move(a));
}

/// Forward then backward substitution; x holds the right-hand side on entry
/// and the solution of E x = rhs on exit. 2n^2 flops.
template <typename Scalar, typename Derived>
void solve_inplace(const FactoredSpd<Scalar>& f, Eigen::MatrixBase<Derived>& x) {
  detail::require_dims(x.rows() == f.size(), "solve_inplace: rhs length");
  f.packed().template triangularView<Eigen::UnitLower>().solveInPlace(x);
  f.packed().template triangularView<Eigen::Upper>().solveInPlace(x);
}

template <typename Scalar, typename Derived>
VecX<Scalar> solve(const FactoredSpd<Scalar>& f, const Eigen::MatrixBase<Derived>& rhs) {
  VecX<Scalar> x = rhs;
  solve_inplace(f, x);
  return x;
}

/// H = M E^-1 M^T, built as H = M * eta where column q of eta solves
/// E eta_q = m_q^T. The result is symmetrized so row and column gathers agree.
template <typename Scalar, typename Derived>
MatX<Scalar> dual_hessian(const FactoredSpd<Scalar>& f, const Eigen::MatrixBase<Derived>& m) {
  detail::require_dims(m.cols() == f.size(), "dual_hessian: constraint matrix column count");
  MatX<Scalar> eta = m.transpose();
  for (Index q = 0; q < eta.cols(); ++q) {
    auto col = eta.col(q);
    solve_inplace(f, col);
  }
  MatX<Scalar> h = m * eta;
  return (h + h.transpose()) / Scalar(2);
}

}  // namespace imuqp
