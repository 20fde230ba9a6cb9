#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "imuqp/mpc.hpp"

namespace imuqp {

/// Chain of unit masses joined by unit springs, with walls at both ends.
/// State [positions; velocities], one force input and one position output per mass.
CtModel build_mass_chain(Index n_masses);

struct ReferenceSpec {
  enum class Kind { Sinusoid, Constant };
  Kind kind = Kind::Sinusoid;
  double amplitude = 1.2;        // A_r, m
  double frequency = 1.0 / 30.0;  // f_r, Hz
  double level = 0.0;            // Constant kind only, m
};

/// r_i(t) = A_r sin(2 pi f_r t - 0.9 (2 phi / (n_y - 1)) pi) with phi = channel
/// (0-based). A single channel gets zero phase.
double reference_at(const ReferenceSpec& spec, Index channel, Index n_y, double t);

struct PlantStep {
  VectorXd x_next;
  VectorXd y;  // output at the current state
};

PlantStep plant_step(const DtModel& dt, const VectorXd& x_p, const VectorXd& u);

struct AccuracyReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;
  double complementary_slackness = 0.0;
  double error_vs_reference = std::numeric_limits<double>::quiet_NaN();
};

template <typename Scalar>
AccuracyReport accuracy_measures(const QpProblem<Scalar>& prob, const QpSolution<Scalar>& sol,
                                 const std::optional<VecX<Scalar>>& theta_ref = std::nullopt) {
  const Index p = prob.num_constraints();
  const VecX<Scalar> lambda = full_multipliers(sol, p);
  const VecX<Scalar> slack = prob.constraints() * sol.theta - prob.bounds();
  AccuracyReport rep;
  rep.stationarity = static_cast<double>(
      (prob.hessian() * sol.theta + prob.grad() + prob.constraints().transpose() * lambda).norm());
  rep.primal_feasibility = static_cast<double>(slack.cwiseMax(Scalar(0)).norm());
  rep.dual_feasibility = static_cast<double>(lambda.cwiseMin(Scalar(0)).norm());
  using std::abs;
  rep.complementary_slackness = static_cast<double>(abs(lambda.dot(slack)));
  if (theta_ref) {
    detail::require_dims(theta_ref->size() == sol.theta.size(), "accuracy_measures: reference length");
    rep.error_vs_reference = static_cast<double>((sol.theta - *theta_ref).norm());
  }
  return rep;
}

struct BenchmarkConfig {
  Index n_masses = 6;
  Index horizon = 27;
  double ts = 0.004;
  double q_weight = 210.0;
  double r_weight = 0.008;
  double p_factor = 45.0;  // P = p_factor * Q
  double du_limit = 0.5;
  double u_limit = 1.0;
  double y_limit = 1e6;
  Index steps = 17500;
  std::uint64_t seed = 5;
  double init_spread = 1.2;                   // rho_i(0) uniform in [-spread, spread]
  std::optional<VectorXd> initial_positions;  // overrides the random draw
  ReferenceSpec reference;
  bool held_reference = false;  // hold r(t) over the horizon instead of previewing
  bool use_observer = false;
  bool with_accuracy = true;
  Index oracle_check_steps = 0;  // randomly sampled steps re-solved by the primal oracle
  SolverOptions solver;
};

struct SimRecord {
  Index k = 0;
  double t = 0.0;
  VectorXd y;
  VectorXd r;
  VectorXd u;
  VectorXd du;
  std::int64_t solve_ns = 0;
  Index m_star = 0;
  Index c_star = 0;
  EventCounts events;
  Index guard_hits = 0;
  AccuracyReport accuracy;
};

struct RunResult {
  BenchmarkConfig config;
  Index n = 0;  // QP variables
  Index p = 0;  // QP constraints
  std::vector<SimRecord> records;
  std::optional<std::string> failure;
  Index failed_step = -1;
  Status failed_status = Status::Optimal;
  Index oracle_checked = 0;
};

/// Closed-loop simulation. Stops at the first non-optimal solve and reports
/// it through RunResult::failure instead of throwing.
RunResult run_closed_loop(const BenchmarkConfig& cfg);

/// Runs independent configurations on a pool of worker threads; results
/// keep the input order.
std::vector<RunResult> run_many(const std::vector<BenchmarkConfig>& cfgs, unsigned threads = 0);

struct RunAggregate {
  double avg = 0.0;
  double max = 0.0;
  double min = 0.0;
};

/// Average, maximum and minimum over samples k_a..k_b (1-based, inclusive, k_a < k_b).
RunAggregate aggregate(const std::vector<double>& values, Index k_a, Index k_b);

struct RunSummary {
  Index horizon = 0;
  std::uint64_t seed = 0;
  Index n = 0;
  Index p = 0;
  Index steps = 0;
  Index k_a = 0;
  Index k_b = 0;
  RunAggregate solve_ns;
  std::int64_t total_solve_ns = 0;
  double avg_c_star = 0.0;
  double avg_m_star = 0.0;
  double avg_stationarity = 0.0;
  double avg_primal_feas = 0.0;
  double avg_dual_feas = 0.0;
  double avg_comp_slack = 0.0;
  double max_accuracy = 0.0;  // largest of the four measures over the window
  std::string failure;
};

/// Aggregates stay zero when the window is shorter than two samples.
RunSummary summarize_run(const RunResult& run, Index k_a, Index k_b);

inline constexpr int kCsvSchemaVersion = 1;

/// Per-step CSV with a `# key=value` config header.
void write_csv(std::ostream& os, const RunResult& run);

void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& rows);

/// %.17g formatting.
std::string format_double(double v);

}  // namespace imuqp
