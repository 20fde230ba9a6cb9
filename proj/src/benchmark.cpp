#include "imuqp/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "imuqp/reference_solvers.hpp"

namespace imuqp {

namespace {

// uniform in [0, 1) from the top 53 bits
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

VectorXd reference_vector(const ReferenceSpec& spec, Index n_y, double t) {
  VectorXd r(n_y);
  for (Index i = 0; i < n_y; ++i) r(i) = reference_at(spec, i, n_y, t);
  return r;
}

const char* kind_name(ReferenceSpec::Kind k) {
  return k == ReferenceSpec::Kind::Sinusoid ? "sinusoid" : "constant";
}

}  // namespace

CtModel build_mass_chain(Index n_masses) {
  if (n_masses < 1) throw Error(Errc::InvalidArgument, "build_mass_chain: need at least one mass");
  const Index n = n_masses;
  MatrixXd coupling = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    coupling(i, i) = -2.0;
    if (i > 0) coupling(i, i - 1) = 1.0;
    if (i + 1 < n) coupling(i, i + 1) = 1.0;
  }
  CtModel ct;
  ct.a_c = MatrixXd::Zero(2 * n, 2 * n);
  ct.a_c.topRightCorner(n, n).setIdentity();
  ct.a_c.bottomLeftCorner(n, n) = coupling;
  ct.b_c = MatrixXd::Zero(2 * n, n);
  ct.b_c.bottomRows(n).setIdentity();
  ct.w_c = VectorXd::Zero(2 * n);
  ct.c_c = MatrixXd::Zero(n, 2 * n);
  ct.c_c.leftCols(n).setIdentity();
  return ct;
}

double reference_at(const ReferenceSpec& spec, Index channel, Index n_y, double t) {
  if (channel < 0 || channel >= n_y) throw Error(Errc::IndexOutOfRange, "reference_at: channel");
  if (spec.kind == ReferenceSpec::Kind::Constant) return spec.level;
  const double pi = std::numbers::pi;
  const double phase = n_y > 1 ? 0.9 * (2.0 * static_cast<double>(channel) / static_cast<double>(n_y - 1)) * pi : 0.0;
  return spec.amplitude * std::sin(2.0 * pi * spec.frequency * t - phase);
}

PlantStep plant_step(const DtModel& dt, const VectorXd& x_p, const VectorXd& u) {
  detail::require_dims(x_p.size() == dt.a_d.rows() && u.size() == dt.b_d.cols(), "plant_step: vector lengths");
  PlantStep s;
  s.y = dt.c_d * x_p;
  s.x_next = dt.a_d * x_p + dt.b_d * u;
  if (dt.w_d.size() == x_p.size()) s.x_next += dt.w_d;
  return s;
}

RunResult run_closed_loop(const BenchmarkConfig& cfg) {
  if (cfg.steps < 0) throw Error(Errc::InvalidArgument, "run_closed_loop: negative step count");
  const Index nm = cfg.n_masses;
  const auto ct = build_mass_chain(nm);
  const auto dt = discretize_zoh(ct, cfg.ts);
  const auto aug = augment(dt);
  const Index nu = aug.n_u(), ny = aug.n_y(), nxp = dt.a_d.rows();

  Weights w;
  w.q = cfg.q_weight * MatrixXd::Identity(ny, ny);
  w.r = cfg.r_weight * MatrixXd::Identity(nu, nu);
  w.p = cfg.p_factor * w.q;
  Limits lim;
  lim.du_min = VectorXd::Constant(nu, -cfg.du_limit);
  lim.du_max = VectorXd::Constant(nu, cfg.du_limit);
  lim.u_min = VectorXd::Constant(nu, -cfg.u_limit);
  lim.u_max = VectorXd::Constant(nu, cfg.u_limit);
  lim.y_min = VectorXd::Constant(ny, -cfg.y_limit);
  lim.y_max = VectorXd::Constant(ny, cfg.y_limit);
  const MpcPlan plan = make_plan(aug, cfg.horizon, w, lim);

  RunResult out;
  out.config = cfg;
  out.n = plan.num_variables();
  out.p = plan.num_constraints();
  if (cfg.steps == 0) return out;

  std::mt19937_64 rng(cfg.seed);
  VectorXd x_p = VectorXd::Zero(nxp);
  if (cfg.initial_positions) {
    detail::require_dims(cfg.initial_positions->size() == nm, "run_closed_loop: initial position count");
    x_p.head(nm) = *cfg.initial_positions;
  } else {
    for (Index i = 0; i < nm; ++i) x_p(i) = cfg.init_spread * (2.0 * unit_uniform(rng) - 1.0);
  }
  VectorXd x_prev = x_p;
  VectorXd u_prev = VectorXd::Zero(nu);

  std::vector<Index> oracle_steps;
  if (cfg.oracle_check_steps > 0) {
    std::vector<Index> all(static_cast<std::size_t>(cfg.steps));
    for (Index k = 0; k < cfg.steps; ++k) all[static_cast<std::size_t>(k)] = k;
    std::mt19937_64 pick(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(all.begin(), all.end(), pick);
    const auto count = static_cast<std::size_t>(std::min(cfg.oracle_check_steps, cfg.steps));
    oracle_steps.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(oracle_steps.begin(), oracle_steps.end());
  }

  std::optional<ObserverGain> observer;
  VectorXd x_hat;
  if (cfg.use_observer) {
    observer = design_observer(aug);
    x_hat = VectorXd::Zero(aug.n_x());
    x_hat.tail(ny) = dt.c_d * x_p;
  }

  SolverWorkspace<double> ws(out.n, out.p, plan.structure->capacity);
  VectorXd r_future(cfg.horizon * ny);
  out.records.reserve(static_cast<std::size_t>(cfg.steps));

  for (Index k = 0; k < cfg.steps; ++k) {
    const double t = static_cast<double>(k) * cfg.ts;
    const VectorXd y = dt.c_d * x_p;
    VectorXd x_aug(aug.n_x());
    if (observer) {
      x_aug = x_hat;
    } else {
      x_aug.head(nxp) = x_p - x_prev;
      x_aug.tail(ny) = y;
    }
    const VectorXd r_now = reference_vector(cfg.reference, ny, t);
    for (Index i = 1; i <= cfg.horizon; ++i) {
      r_future.segment((i - 1) * ny, ny) =
          cfg.held_reference ? r_now : reference_vector(cfg.reference, ny, t + static_cast<double>(i) * cfg.ts);
    }

    StepResult step = receding_horizon_step(plan, ws, x_aug, r_future, u_prev, cfg.solver);
    if (step.solution.status != Status::Optimal) {
      out.failure = std::string("solver returned ") + to_string(step.solution.status) + " at step " +
                    std::to_string(k);
      out.failed_step = k;
      out.failed_status = step.solution.status;
      break;
    }

    SimRecord rec;
    rec.k = k;
    rec.t = t;
    rec.y = y;
    rec.r = r_now;
    rec.u = step.u;
    rec.du = step.du;
    rec.solve_ns = step.solve_ns;
    rec.m_star = step.solution.m_star;
    rec.c_star = step.solution.c_star;
    rec.events = step.solution.events;
    rec.guard_hits = step.solution.guard_hits;

    const bool check = std::binary_search(oracle_steps.begin(), oracle_steps.end(), k);
    if (cfg.with_accuracy || check) {
      const auto prob = assemble_qp(plan, x_aug, r_future, u_prev);
      std::optional<VectorXd> theta_ref;
      if (check) {
        const auto ref = primal_active_set_solve(prob, VectorXd::Zero(out.n));
        if (ref.status != Status::Optimal) {
          out.failure = "oracle did not converge at step " + std::to_string(k);
          out.failed_step = k;
          break;
        }
        theta_ref = ref.theta;
        ++out.oracle_checked;
      }
      rec.accuracy = accuracy_measures(prob, step.solution, theta_ref);
    }
    out.records.push_back(std::move(rec));

    if (observer) x_hat = observer_step(*observer, aug, x_hat, step.du, y);
    x_prev = x_p;
    x_p = plant_step(dt, x_p, step.u).x_next;
    u_prev = step.u;
  }
  return out;
}

std::vector<RunResult> run_many(const std::vector<BenchmarkConfig>& cfgs, unsigned threads) {
  std::vector<RunResult> results(cfgs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, cfgs.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        results[i] = run_closed_loop(cfgs[i]);
      } catch (const std::exception& e) {
        results[i].config = cfgs[i];
        results[i].failure = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

RunAggregate aggregate(const std::vector<double>& values, Index k_a, Index k_b) {
  const auto len = static_cast<Index>(values.size());
  if (k_a < 1 || k_b <= k_a || k_b > len) {
    throw Error(Errc::WindowOutOfRange, "aggregate: window [" + std::to_string(k_a) + ", " +
                                            std::to_string(k_b) + "] outside 1.." + std::to_string(len));
  }
  RunAggregate agg;
  double sum = 0.0;
  agg.max = values[static_cast<std::size_t>(k_a - 1)];
  agg.min = agg.max;
  for (Index i = k_a; i <= k_b; ++i) {
    const double v = values[static_cast<std::size_t>(i - 1)];
    sum += v;
    agg.max = std::max(agg.max, v);
    agg.min = std::min(agg.min, v);
  }
  agg.avg = sum / static_cast<double>(k_b - k_a + 1);
  return agg;
}

RunSummary summarize_run(const RunResult& run, Index k_a, Index k_b) {
  RunSummary s;
  s.horizon = run.config.horizon;
  s.seed = run.config.seed;
  s.n = run.n;
  s.p = run.p;
  s.steps = static_cast<Index>(run.records.size());
  s.k_a = k_a;
  s.k_b = k_b;
  s.failure = run.failure.value_or("");
  if (k_b <= k_a) return s;

  std::vector<double> ns, cs, ms, st, pf, df, cslk;
  for (const auto& r : run.records) {
    ns.push_back(static_cast<double>(r.solve_ns));
    cs.push_back(static_cast<double>(r.c_star));
    ms.push_back(static_cast<double>(r.m_star));
    st.push_back(r.accuracy.stationarity);
    pf.push_back(r.accuracy.primal_feasibility);
    df.push_back(r.accuracy.dual_feasibility);
    cslk.push_back(r.accuracy.complementary_slackness);
  }
  s.solve_ns = aggregate(ns, k_a, k_b);
  for (Index i = k_a; i <= k_b; ++i) s.total_solve_ns += run.records[static_cast<std::size_t>(i - 1)].solve_ns;
  s.avg_c_star = aggregate(cs, k_a, k_b).avg;
  s.avg_m_star = aggregate(ms, k_a, k_b).avg;
  const auto a_st = aggregate(st, k_a, k_b), a_pf = aggregate(pf, k_a, k_b);
  const auto a_df = aggregate(df, k_a, k_b), a_cs = aggregate(cslk, k_a, k_b);
  s.avg_stationarity = a_st.avg;
  s.avg_primal_feas = a_pf.avg;
  s.avg_dual_feas = a_df.avg;
  s.avg_comp_slack = a_cs.avg;
  s.max_accuracy = std::max({a_st.max, a_pf.max, a_df.max, a_cs.max});
  return s;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const RunResult& run) {
  const auto& c = run.config;
  const Index nu = c.n_masses, ny = c.n_masses;
  os << "# schema_version=" << kCsvSchemaVersion << '\n'
     << "# n_masses=" << c.n_masses << '\n'
     << "# horizon=" << c.horizon << '\n'
     << "# ts=" << format_double(c.ts) << '\n'
     << "# q_weight=" << format_double(c.q_weight) << '\n'
     << "# r_weight=" << format_double(c.r_weight) << '\n'
     << "# p_factor=" << format_double(c.p_factor) << '\n'
     << "# du_limit=" << format_double(c.du_limit) << '\n'
     << "# u_limit=" << format_double(c.u_limit) << '\n'
     << "# y_limit=" << format_double(c.y_limit) << '\n'
     << "# steps=" << c.steps << '\n'
     << "# seed=" << c.seed << '\n'
     << "# rng=mt19937_64\n"
     << "# init_spread=" << format_double(c.init_spread) << '\n'
     << "# reference=" << kind_name(c.reference.kind) << '\n'
     << "# amplitude=" << format_double(c.reference.amplitude) << '\n'
     << "# frequency=" << format_double(c.reference.frequency) << '\n'
     << "# level=" << format_double(c.reference.level) << '\n'
     << "# held_reference=" << (c.held_reference ? 1 : 0) << '\n'
     << "# use_observer=" << (c.use_observer ? 1 : 0) << '\n'
     << "# eps_q=" << format_double(c.solver.eps_q) << '\n'
     << "# drop_rule=" << (c.solver.drop_rule == DropRule::RatioTest ? "ratio" : "most-negative") << '\n'
     << "# n=" << run.n << '\n'
     << "# p=" << run.p << '\n';
  if (run.failure) os << "# failure=" << *run.failure << '\n';

  os << "k,t";
  for (Index i = 1; i <= ny; ++i) os << ",y_" << i;
  for (Index i = 1; i <= ny; ++i) os << ",r_" << i;
  for (Index i = 1; i <= nu; ++i) os << ",u_" << i;
  for (Index i = 1; i <= nu; ++i) os << ",du_" << i;
  os << ",solve_ns,m_star,c_star,t_l,t_a,t_r,stationarity,primal_feas,dual_feas,comp_slack,err_vs_ref\n";

  for (const auto& r : run.records) {
    os << r.k << ',' << format_double(r.t);
    for (Index i = 0; i < ny; ++i) os << ',' << format_double(r.y(i));
    for (Index i = 0; i < ny; ++i) os << ',' << format_double(r.r(i));
    for (Index i = 0; i < nu; ++i) os << ',' << format_double(r.u(i));
    for (Index i = 0; i < nu; ++i) os << ',' << format_double(r.du(i));
    os << ',' << r.solve_ns << ',' << r.m_star << ',' << r.c_star << ',' << r.events.dependent_adds << ','
       << r.events.independent_adds << ',' << r.events.removals << ',' << format_double(r.accuracy.stationarity)
       << ',' << format_double(r.accuracy.primal_feasibility) << ',' << format_double(r.accuracy.dual_feasibility)
       << ',' << format_double(r.accuracy.complementary_slackness) << ','
       << format_double(r.accuracy.error_vs_reference) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& rows) {
  os << "# schema_version=" << kCsvSchemaVersion << '\n';
  os << "N,seed,n,p,steps,k_a,k_b,avg_solve_ns,max_solve_ns,min_solve_ns,total_solve_ns,avg_c_star,avg_m_star,"
        "avg_stationarity,avg_primal_feas,avg_dual_feas,avg_comp_slack,failure\n";
  for (const auto& s : rows) {
    os << s.horizon << ',' << s.seed << ',' << s.n << ',' << s.p << ',' << s.steps << ',' << s.k_a << ','
       << s.k_b << ',' << format_double(s.solve_ns.avg) << ',' << format_double(s.solve_ns.max) << ','
       << format_double(s.solve_ns.min) << ',' << s.total_solve_ns << ',' << format_double(s.avg_c_star) << ','
       << format_double(s.avg_m_star) << ',' << format_double(s.avg_stationarity) << ','
       << format_double(s.avg_primal_feas) << ',' << format_double(s.avg_dual_feas) << ','
       << format_double(s.avg_comp_slack) << ',' << s.failure << '\n';
  }
}

}  // namespace imuqp
