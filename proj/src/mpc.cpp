#include "imuqp/mpc.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>

namespace imuqp {

namespace {

MatrixXd block_diag_repeat(const MatrixXd& blk, Index count) {
  MatrixXd out = MatrixXd::Zero(blk.rows() * count, blk.cols() * count);
  for (Index i = 0; i < count; ++i) out.block(i * blk.rows(), i * blk.cols(), blk.rows(), blk.cols()) = blk;
  return out;
}

void require_square(const MatrixXd& m, Index n, const char* what) {
  detail::require_dims(m.rows() == n && m.cols() == n, what);
}

bool positive_definite(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

}  // namespace

DtModel discretize_zoh(const CtModel& ct, double ts) {
  if (!(ts > 0)) throw Error(Errc::InvalidArgument, "discretize_zoh: sampling period must be positive");
  const Index nx = ct.a_c.rows();
  require_square(ct.a_c, nx, "discretize_zoh: A_c must be square");
  detail::require_dims(ct.b_c.rows() == nx, "discretize_zoh: B_c rows");
  detail::require_dims(ct.c_c.cols() == nx, "discretize_zoh: C_c columns");
  const Index nu = ct.b_c.cols();
  VectorXd w_c = ct.w_c.size() == 0 ? VectorXd::Zero(nx) : ct.w_c;
  detail::require_dims(w_c.size() == nx, "discretize_zoh: w_c length");

  // exp([[A, B, w], [0, 0, 0]] ts) = [[A_d, B_d, w_d], [0, I, 0], [0, 0, 1]]
  const Index dim = nx + nu + 1;
  MatrixXd blk = MatrixXd::Zero(dim, dim);
  blk.topLeftCorner(nx, nx) = ct.a_c;
  blk.block(0, nx, nx, nu) = ct.b_c;
  blk.block(0, nx + nu, nx, 1) = w_c;
  const MatrixXd ex = (blk * ts).exp();

  DtModel dt;
  dt.a_d = ex.topLeftCorner(nx, nx);
  dt.b_d = ex.block(0, nx, nx, nu);
  dt.w_d = ex.block(0, nx + nu, nx, 1);
  dt.c_d = ct.c_c;
  return dt;
}

DtAugModel augment(const DtModel& dt) {
  const Index nxp = dt.a_d.rows();
  require_square(dt.a_d, nxp, "augment: A_d must be square");
  detail::require_dims(dt.b_d.rows() == nxp, "augment: B_d rows");
  detail::require_dims(dt.c_d.cols() == nxp, "augment: C_d columns");
  const Index ny = dt.c_d.rows();
  const Index nu = dt.b_d.cols();

  DtAugModel aug;
  aug.a = MatrixXd::Zero(nxp + ny, nxp + ny);
  aug.a.topLeftCorner(nxp, nxp) = dt.a_d;
  aug.a.bottomLeftCorner(ny, nxp) = dt.c_d * dt.a_d;
  aug.a.bottomRightCorner(ny, ny).setIdentity();
  aug.b.resize(nxp + ny, nu);
  aug.b.topRows(nxp) = dt.b_d;
  aug.b.bottomRows(ny) = dt.c_d * dt.b_d;
  aug.c = MatrixXd::Zero(ny, nxp + ny);
  aug.c.rightCols(ny).setIdentity();
  aug.plant = dt;
  return aug;
}

Prediction build_prediction(const DtAugModel& aug, Index horizon) {
  if (horizon < 1) throw Error(Errc::InvalidArgument, "build_prediction: horizon must be >= 1");
  const Index nx = aug.n_x(), nu = aug.n_u(), ny = aug.n_y();
  Prediction pred;
  pred.phi.resize(horizon * ny, nx);
  pred.gamma = MatrixXd::Zero(horizon * ny, horizon * nu);

  // markov[i] = C A^i B
  std::vector<MatrixXd> markov;
  markov.reserve(static_cast<std::size_t>(horizon));
  MatrixXd ca = aug.c;
  for (Index i = 0; i < horizon; ++i) {
    markov.push_back(ca * aug.b);
    ca = ca * aug.a;
    pred.phi.middleRows(i * ny, ny) = ca;
  }
  for (Index i = 0; i < horizon; ++i)
    for (Index j = 0; j <= i; ++j) pred.gamma.block(i * ny, j * nu, ny, nu) = markov[static_cast<std::size_t>(i - j)];
  return pred;
}

CostMatrices build_cost(const Prediction& pred, const Weights& w, Index horizon) {
  const Index ny = w.q.rows();
  const Index nu = w.r.rows();
  require_square(w.q, ny, "build_cost: Q must be square");
  require_square(w.p, ny, "build_cost: P shape");
  require_square(w.r, nu, "build_cost: R must be square");
  detail::require_dims(pred.gamma.rows() == horizon * ny && pred.gamma.cols() == horizon * nu,
                       "build_cost: prediction does not match weights");

  CostMatrices cost;
  cost.omega = block_diag_repeat(w.q, horizon);
  cost.omega.bottomRightCorner(ny, ny) = w.p;
  cost.psi = block_diag_repeat(w.r, horizon);
  MatrixXd e = 2.0 * (cost.psi + pred.gamma.transpose() * cost.omega * pred.gamma);
  cost.e = 0.5 * (e + e.transpose());
  if (!positive_definite(cost.e)) throw Error(Errc::NotPositiveDefinite, "build_cost: E is not positive definite");
  return cost;
}

ConstraintStack build_constraints(const DtAugModel& aug, const Prediction& pred, Index horizon,
                                  const Limits& lim) {
  const Index nx = aug.n_x(), nu = aug.n_u(), ny = aug.n_y();
  const Index n = horizon * nu;
  detail::require_dims(lim.du_min.size() == nu && lim.du_max.size() == nu && lim.u_min.size() == nu &&
                           lim.u_max.size() == nu && lim.y_min.size() == ny && lim.y_max.size() == ny,
                       "build_constraints: limit vector lengths");
  detail::require_dims(pred.phi.rows() == horizon * ny && pred.gamma.cols() == n,
                       "build_constraints: prediction shape");
  if (!((lim.du_min.array() < lim.du_max.array()).all() && (lim.u_min.array() < lim.u_max.array()).all() &&
        (lim.y_min.array() < lim.y_max.array()).all())) {
    throw Error(Errc::InvalidArgument, "build_constraints: every lower limit must be below its upper limit");
  }

  const Index stage = 2 * nu + 2 * ny;
  const Index rows_stage = horizon * stage + 2 * ny;
  const Index p = rows_stage + 2 * n;

  // stage block: Z dU + T Y + D x <= C
  MatrixXd z = MatrixXd::Zero(rows_stage, n);
  MatrixXd t = MatrixXd::Zero(rows_stage, horizon * ny);
  MatrixXd dmat = MatrixXd::Zero(rows_stage, nx);
  VectorXd cvec(rows_stage);
  const MatrixXd iu = MatrixXd::Identity(nu, nu);
  const MatrixXd iy = MatrixXd::Identity(ny, ny);
  for (Index i = 0; i <= horizon; ++i) {
    const Index r0 = i * stage;
    Index yrow = r0;
    if (i < horizon) {
      z.block(r0, i * nu, nu, nu) = -iu;
      z.block(r0 + nu, i * nu, nu, nu) = iu;
      cvec.segment(r0, nu) = -lim.du_min;
      cvec.segment(r0 + nu, nu) = lim.du_max;
      yrow = r0 + 2 * nu;
    }
    cvec.segment(yrow, ny) = -lim.y_min;
    cvec.segment(yrow + ny, ny) = lim.y_max;
    if (i == 0) {
      dmat.block(yrow, 0, ny, nx) = -aug.c;
      dmat.block(yrow + ny, 0, ny, nx) = aug.c;
    } else {
      t.block(yrow, (i - 1) * ny, ny, ny) = -iy;
      t.block(yrow + ny, (i - 1) * ny, ny, ny) = iy;
    }
  }

  MatrixXd kmat = MatrixXd::Zero(n, n);
  MatrixXd smat(n, nu);
  for (Index i = 0; i < horizon; ++i) {
    smat.middleRows(i * nu, nu) = iu;
    for (Index j = 0; j <= i; ++j) kmat.block(i * nu, j * nu, nu, nu) = iu;
  }

  ConstraintStack cs;
  cs.l.resize(p, n);
  cs.l.topRows(rows_stage) = t * pred.gamma + z;
  cs.l.middleRows(rows_stage, n) = -kmat;
  cs.l.bottomRows(n) = kmat;
  cs.d.resize(p);
  cs.d.head(rows_stage) = cvec;
  cs.d.segment(rows_stage, n) = -lim.u_min.replicate(horizon, 1);
  cs.d.tail(n) = lim.u_max.replicate(horizon, 1);
  cs.w = MatrixXd::Zero(p, nx);
  cs.w.topRows(rows_stage) = -dmat - t * pred.phi;
  cs.v = MatrixXd::Zero(p, nu);
  cs.v.middleRows(rows_stage, n) = smat;
  cs.v.bottomRows(n) = -smat;
  return cs;
}

MpcPlan make_plan(const DtAugModel& aug, Index horizon, const Weights& w, const Limits& limits) {
  if (!positive_definite(w.p - w.q)) {
    throw Error(Errc::NotPositiveDefinite, "make_plan: P - Q must be positive definite");
  }
  if (!positive_definite(w.q) || !positive_definite(w.r)) {
    throw Error(Errc::NotPositiveDefinite, "make_plan: Q and R must be positive definite");
  }
  MpcPlan plan;
  plan.horizon = horizon;
  plan.model = aug;
  plan.weights = w;
  plan.limits = limits;
  plan.pred = build_prediction(aug, horizon);
  plan.cost = build_cost(plan.pred, w, horizon);
  plan.cons = build_constraints(aug, plan.pred, horizon, limits);
  plan.structure = make_structure<double>(plan.cost.e, plan.cons.l, plan.cons.l.rows() / 2);
  const MatrixXd gto = plan.pred.gamma.transpose() * plan.cost.omega;
  plan.f_state = 2.0 * gto * plan.pred.phi;
  plan.f_ref = -2.0 * gto;
  return plan;
}

QpProblem<double> assemble_qp(const MpcPlan& plan, const VectorXd& x_k, const VectorXd& r_future,
                              const VectorXd& u_prev) {
  detail::require_dims(x_k.size() == plan.model.n_x(), "assemble_qp: state length");
  detail::require_dims(r_future.size() == plan.horizon * plan.model.n_y(), "assemble_qp: reference length");
  detail::require_dims(u_prev.size() == plan.model.n_u(), "assemble_qp: previous input length");
  VectorXd grad = plan.f_state * x_k + plan.f_ref * r_future;
  VectorXd bounds = plan.cons.d + plan.cons.w * x_k + plan.cons.v * u_prev;
  return QpProblem<double>(plan.structure, std::move(grad), std::move(bounds));
}

StepResult receding_horizon_step(const MpcPlan& plan, SolverWorkspace<double>& ws, const VectorXd& x_k,
                                 const VectorXd& r_future, const VectorXd& u_prev, const SolverOptions& opts) {
  const auto prob = assemble_qp(plan, x_k, r_future, u_prev);
  StepResult out;
  const auto t0 = std::chrono::steady_clock::now();
  out.solution = solve(prob, ws, opts);
  const auto t1 = std::chrono::steady_clock::now();
  out.solve_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  out.du = out.solution.theta.head(plan.model.n_u());
  out.u = u_prev + out.du;
  return out;
}

ObserverGain::ObserverGain(const DtAugModel& aug, MatrixXd l_gain) : l_(std::move(l_gain)) {
  detail::require_dims(l_.rows() == aug.n_x() && l_.cols() == aug.n_y(), "ObserverGain: L shape");
  const MatrixXd closed = aug.a - l_ * aug.c;
  rho_ = closed.eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho_ < 1.0)) {
    throw Error(Errc::InvalidArgument, "ObserverGain: A - L C is not stable (spectral radius " +
                                           std::to_string(rho_) + ")");
  }
}

ObserverGain design_observer(const DtAugModel& aug, int iterations) {
  const Index nx = aug.n_x(), ny = aug.n_y();
  const MatrixXd& a = aug.a;
  const MatrixXd& c = aug.c;
  MatrixXd p = MatrixXd::Identity(nx, nx);
  MatrixXd l(nx, ny);
  for (int it = 0; it < iterations; ++it) {
    const MatrixXd s = c * p * c.transpose() + MatrixXd::Identity(ny, ny);
    l = a * p * c.transpose() * s.inverse();
    MatrixXd next = a * p * a.transpose() - l * s * l.transpose() + MatrixXd::Identity(nx, nx);
    next = 0.5 * (next + next.transpose());
    const double delta = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (delta < 1e-12 * (1.0 + p.cwiseAbs().maxCoeff())) break;
  }
  const MatrixXd s = c * p * c.transpose() + MatrixXd::Identity(ny, ny);
  l = a * p * c.transpose() * s.inverse();
  return ObserverGain(aug, l);
}

VectorXd observer_step(const ObserverGain& obs, const DtAugModel& aug, const VectorXd& x_hat,
                       const VectorXd& du, const VectorXd& y) {
  detail::require_dims(x_hat.size() == aug.n_x() && du.size() == aug.n_u() && y.size() == aug.n_y(),
                       "observer_step: vector lengths");
  const MatrixXd& l = obs.gain();
  detail::require_dims(l.rows() == aug.n_x() && l.cols() == aug.n_y(), "observer_step: gain shape");
  return aug.a * x_hat - l * (aug.c * x_hat) + aug.b * du + l * y;
}

}  // namespace imuqp
