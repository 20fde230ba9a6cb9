#pragma once

#include <cstdint>
#include <memory>

#include "imuqp/solver.hpp"

namespace imuqp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// x_p' = A_c x_p + B_c u + w_c,  y = C_c x_p.
struct CtModel {
  MatrixXd a_c;
  MatrixXd b_c;
  VectorXd w_c;
  MatrixXd c_c;
};

/// x_p(k+1) = A_d x_p(k) + B_d u(k) + w_d,  y(k) = C_d x_p(k).
struct DtModel {
  MatrixXd a_d;
  MatrixXd b_d;
  VectorXd w_d;
  MatrixXd c_d;
};

/// Incremental model with state x(k) = [x_p(k) - x_p(k-1); y(k)] and input du(k).
struct DtAugModel {
  MatrixXd a;
  MatrixXd b;
  MatrixXd c;
  DtModel plant;

  Index n_x() const { return a.rows(); }
  Index n_u() const { return b.cols(); }
  Index n_y() const { return c.rows(); }
};

DtModel discretize_zoh(const CtModel& ct, double ts);
DtAugModel augment(const DtModel& dt);

/// Stacked outputs over the horizon: Y = phi x(k) + gamma dU.
struct Prediction {
  MatrixXd phi;    // N n_y x n_x
  MatrixXd gamma;  // N n_y x N n_u
};

Prediction build_prediction(const DtAugModel& aug, Index horizon);

struct Weights {
  MatrixXd q;  // stage output weight
  MatrixXd r;  // input-increment weight
  MatrixXd p;  // terminal output weight, P - Q must be positive definite
};

struct CostMatrices {
  MatrixXd e;      // 2 (Psi + Gamma^T Omega Gamma)
  MatrixXd omega;  // blockdiag(Q, ..., Q, P)
  MatrixXd psi;    // blockdiag(R, ..., R)
};

CostMatrices build_cost(const Prediction& pred, const Weights& w, Index horizon);

struct Limits {
  VectorXd du_min, du_max;
  VectorXd u_min, u_max;
  VectorXd y_min, y_max;
};

/// L dU <= d + W x(k) + V u(k-1).
///
/// Rows come in three blocks. The first holds, for stages i = 0..N-1, the
/// rows [-du_i; du_i; -y_i; y_i] and, for the terminal stage, [-y_N; y_N].
/// Then the u lower bounds (-K dU <= -U_min + S u_prev) and the u upper
/// bounds (K dU <= U_max - S u_prev). The stage-0 output rows depend only
/// on x(k) and have zero rows in L.
struct ConstraintStack {
  MatrixXd l;
  VectorXd d;
  MatrixXd w;
  MatrixXd v;
};

ConstraintStack build_constraints(const DtAugModel& aug, const Prediction& pred, Index horizon,
                                  const Limits& limits);

/// Everything that stays constant over a closed-loop run.
struct MpcPlan {
  Index horizon = 0;
  DtAugModel model;
  Prediction pred;
  Weights weights;
  Limits limits;
  CostMatrices cost;
  ConstraintStack cons;
  std::shared_ptr<const QpStructure<double>> structure;
  MatrixXd f_state;  // F = f_state x(k) + f_ref R_k
  MatrixXd f_ref;

  Index num_variables() const { return cost.e.rows(); }
  Index num_constraints() const { return cons.l.rows(); }
};

/// Builds the plan and factors E once. Active-set capacity is p/2 since a
/// lower/upper bound pair can never be active together.
MpcPlan make_plan(const DtAugModel& aug, Index horizon, const Weights& w, const Limits& limits);

/// QP for one sample: theta = dU, F = 2 Gamma^T Omega (Phi x - R), gamma = d + W x + V u_prev.
QpProblem<double> assemble_qp(const MpcPlan& plan, const VectorXd& x_k, const VectorXd& r_future,
                              const VectorXd& u_prev);

struct StepResult {
  VectorXd u;
  VectorXd du;
  QpSolution<double> solution;
  std::int64_t solve_ns = 0;
};

/// Assembles and solves one QP and applies the first increment. Only the
/// solve call is timed. A non-optimal status is passed through untouched.
StepResult receding_horizon_step(const MpcPlan& plan, SolverWorkspace<double>& ws, const VectorXd& x_k,
                                 const VectorXd& r_future, const VectorXd& u_prev,
                                 const SolverOptions& opts = {});

/// Predictor-form observer gain; construction rejects gains with
/// spectral radius of (A - L C) >= 1.
class ObserverGain {
 public:
  ObserverGain(const DtAugModel& aug, MatrixXd l_gain);

  const MatrixXd& gain() const { return l_; }
  double spectral_radius() const { return rho_; }

 private:
  MatrixXd l_;
  double rho_ = 0.0;
};

/// Steady-state Kalman predictor gain with identity covariances.
ObserverGain design_observer(const DtAugModel& aug, int iterations = 20000);

/// x_hat(k+1) = (A - L C) x_hat(k) + B du(k) + L y(k).
VectorXd observer_step(const ObserverGain& obs, const DtAugModel& aug, const VectorXd& x_hat,
                       const VectorXd& du, const VectorXd& y);

}  // namespace imuqp
