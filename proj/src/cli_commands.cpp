#include "imuqp/cli_commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imuqp/complexity.hpp"
#include "imuqp/qp_file.hpp"
#include "imuqp/reference_solvers.hpp"

namespace imuqp::cli {

namespace {

std::string join(const VectorXd& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v(i));
  return s;
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

SolverOptions solver_options(const SolveOptions& o) {
  SolverOptions s;
  s.eps_q = o.eps_q;
  s.max_iter = o.max_iter;
  s.drop_rule = o.drop_rule;
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(Errc::InvalidArgument, "config '" + key + "': bad number '" + v + "'");
  return d;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(Errc::InvalidArgument, "config '" + key + "': bad integer '" + v + "'");
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(Errc::InvalidArgument, "config '" + key + "': expected a boolean, found '" + v + "'");
}

}  // namespace

int exit_code(Status s) {
  switch (s) {
    case Status::Optimal: return kExitOptimal;
    case Status::Infeasible: return kExitInfeasible;
    case Status::IterationLimit:
    case Status::CycleGuardTripped: return kExitLimit;
  }
  return kExitUsage;
}

int cmd_solve(const std::string& path, const SolveOptions& opts, std::ostream& out, std::ostream& /*err*/) {
  const auto prob = to_problem(read_qp_file(path));
  const auto sol = solve(prob, solver_options(opts));

  out << "status: " << to_string(sol.status) << '\n';
  if (sol.status == Status::Infeasible) {
    const double ymax = sol.certificate_y.size() > 0 ? sol.certificate_y.maxCoeff() : 0.0;
    out << "rejected constraint: " << sol.rejected_constraint << '\n'
        << "q: " << format_double(sol.certificate_q) << " (<= eps_q " << format_double(opts.eps_q) << ")\n"
        << "y: " << join(sol.certificate_y) << '\n'
        << "max(y): " << format_double(ymax) << " (<= 0, no feasible point exists)\n";
  }
  out << "theta: " << join(sol.theta) << '\n'
      << "lambda_active: " << join(sol.lambda_active) << '\n'
      << "active: " << join(sol.active) << '\n'
      << "c_star: " << sol.c_star << '\n'
      << "m_star: " << sol.m_star << '\n'
      << "events: t_l=" << sol.events.dependent_adds << " t_a=" << sol.events.independent_adds
      << " t_r=" << sol.events.removals << '\n';
  if (sol.guard_hits > 0) out << "guard_hits: " << sol.guard_hits << '\n';
  if (sol.status != Status::Infeasible) {
    const auto acc = accuracy_measures(prob, sol);
    out << "objective: " << format_double(objective_value(prob, sol.theta)) << '\n'
        << "stationarity: " << format_double(acc.stationarity) << '\n'
        << "primal_feasibility: " << format_double(acc.primal_feasibility) << '\n'
        << "dual_feasibility: " << format_double(acc.dual_feasibility) << '\n'
        << "complementary_slackness: " << format_double(acc.complementary_slackness) << '\n';
  }
  return exit_code(sol.status);
}

int cmd_verify(const std::string& path, const SolveOptions& opts, std::ostream& out, std::ostream& err) {
  const auto prob = to_problem(read_qp_file(path));
  if (prob.num_constraints() > kEnumMaxConstraints || prob.num_variables() > kEnumMaxVariables) {
    err << "error: SizeLimit: verify handles p <= " << kEnumMaxConstraints << " and n <= " << kEnumMaxVariables
        << " (got p = " << prob.num_constraints() << ", n = " << prob.num_variables() << ")\n";
    return kExitUsage;
  }
  const auto mine = solve(prob, solver_options(opts));
  const auto enumd = enumerate_active_sets(prob);
  HildrethOptions hopts;
  hopts.tol = 1e-12;
  hopts.max_iter = 200000;
  const auto hild = hildreth_solve(prob, hopts);

  out << "imuqp: " << to_string(mine.status) << '\n'
      << "enumeration: " << to_string(enumd.status) << '\n'
      << "hildreth: " << to_string(hild.status) << " after " << hild.m_star << " sweeps\n";

  if (enumd.status == Status::Infeasible || mine.status == Status::Infeasible) {
    const bool unanimous = enumd.status == mine.status;
    out << (unanimous ? "agreement: unanimous infeasible (hildreth excluded from the vote)\n"
                      : "agreement: FAILED, feasibility verdicts differ\n");
    return unanimous ? kExitOptimal : kExitMismatch;
  }
  if (mine.status != Status::Optimal) {
    out << "agreement: FAILED, solver did not reach an optimum\n";
    return kExitMismatch;
  }
  const double d_enum = (mine.theta - enumd.theta).norm();
  const double d_hild = (hild.theta - enumd.theta).norm();
  out << "|theta - theta_enum| = " << format_double(d_enum) << '\n'
      << "|theta_hildreth - theta_enum| = " << format_double(d_hild) << '\n';
  const bool ok = d_enum <= 1e-7 && d_hild <= 1e-5;
  out << "agreement: " << (ok ? "ok" : "FAILED") << '\n';
  return ok ? kExitOptimal : kExitMismatch;
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<BenchmarkConfig> cfgs;
  std::vector<Index> horizons;
  if (opts.sweep_n) {
    for (Index n = opts.sweep_n->first; n <= opts.sweep_n->second; ++n) horizons.push_back(n);
  } else {
    horizons.push_back(opts.base.horizon);
  }
  std::vector<std::uint64_t> seeds = opts.seeds.empty() ? std::vector<std::uint64_t>{opts.base.seed} : opts.seeds;
  for (Index n : horizons) {
    for (auto s : seeds) {
      BenchmarkConfig c = opts.base;
      c.horizon = n;
      c.seed = s;
      cfgs.push_back(c);
    }
  }

  const bool single = cfgs.size() == 1;
  std::vector<RunResult> runs;
  if (opts.out_dir) {
    runs = run_many(cfgs, opts.threads);
  } else {
    for (const auto& c : cfgs) runs.push_back(run_closed_loop(c));
  }

  std::vector<RunSummary> summaries;
  int code = kExitOptimal;
  for (const auto& run : runs) {
    const Index k_b = static_cast<Index>(run.records.size());
    const Index k_a = opts.k_a < k_b ? opts.k_a : 1;
    summaries.push_back(summarize_run(run, k_a, k_b));
    if (run.failure) {
      err << "run N=" << run.config.horizon << " seed=" << run.config.seed << " halted: " << *run.failure << '\n';
      code = run.failed_step >= 0 ? exit_code(run.failed_status) : kExitUsage;
      if (code == kExitOptimal) code = kExitLimit;
    }
  }

  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    for (const auto& run : runs) {
      const auto file = std::filesystem::path(*opts.out_dir) /
                        ("run_N" + std::to_string(run.config.horizon) + "_seed" + std::to_string(run.config.seed) + ".csv");
      std::ofstream f(file);
      write_csv(f, run);
    }
    std::ofstream f(std::filesystem::path(*opts.out_dir) / "summary.csv");
    write_summary_csv(f, summaries);
    write_summary_csv(out, summaries);
  } else if (single) {
    write_csv(out, runs.front());
  } else {
    write_summary_csv(out, summaries);
  }
  return code;
}

int cmd_footprint(Index lo, Index hi, std::ostream& out) {
  if (lo < 1 || hi < lo) throw Error(Errc::InvalidArgument, "footprint: need 1 <= lo <= hi");
  out << "N,p,w,imuqp,qpoases\n";
  for (Index n = lo; n <= hi; ++n) {
    const auto fp = memory_footprint(n);
    const auto p = mpc_constraint_count(n, 1, 1);
    out << n << ',' << p << ',' << p / 2 << ',' << fp.imuqp << ',' << fp.qpoases << '\n';
  }
  return kExitOptimal;
}

DropRule parse_drop_rule(const std::string& text) {
  if (text == "ratio") return DropRule::RatioTest;
  if (text == "most-negative") return DropRule::MostNegative;
  throw Error(Errc::InvalidArgument, "drop rule must be 'ratio' or 'most-negative', found '" + text + "'");
}

std::pair<Index, Index> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  auto num = [&](const std::string& s) {
    return static_cast<Index>(parse_int("range", trim(s)));
  };
  if (dots == std::string::npos) {
    const Index v = num(text);
    return {v, v};
  }
  const Index a = num(text.substr(0, dots));
  const Index b = num(text.substr(dots + 2));
  if (b < a) throw Error(Errc::InvalidArgument, "range '" + text + "' is empty");
  return {a, b};
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_int("seeds", trim(item));
    if (v < 0) throw Error(Errc::InvalidArgument, "seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  if (seeds.empty()) throw Error(Errc::InvalidArgument, "empty seed list");
  return seeds;
}

void apply_config_entry(BenchmarkConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "n_masses" || key == "masses") cfg.n_masses = parse_int(key, v);
  else if (key == "horizon" || key == "N") cfg.horizon = parse_int(key, v);
  else if (key == "ts") cfg.ts = parse_double(key, v);
  else if (key == "q_weight") cfg.q_weight = parse_double(key, v);
  else if (key == "r_weight") cfg.r_weight = parse_double(key, v);
  else if (key == "p_factor") cfg.p_factor = parse_double(key, v);
  else if (key == "du_limit") cfg.du_limit = parse_double(key, v);
  else if (key == "u_limit") cfg.u_limit = parse_double(key, v);
  else if (key == "y_limit") cfg.y_limit = parse_double(key, v);
  else if (key == "steps") cfg.steps = parse_int(key, v);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "init_spread") cfg.init_spread = parse_double(key, v);
  else if (key == "reference") {
    if (v == "sinusoid") cfg.reference.kind = ReferenceSpec::Kind::Sinusoid;
    else if (v == "constant") cfg.reference.kind = ReferenceSpec::Kind::Constant;
    else throw Error(Errc::InvalidArgument, "config 'reference': expected sinusoid or constant");
  }
  else if (key == "amplitude") cfg.reference.amplitude = parse_double(key, v);
  else if (key == "frequency") cfg.reference.frequency = parse_double(key, v);
  else if (key == "level") cfg.reference.level = parse_double(key, v);
  else if (key == "held_reference") cfg.held_reference = parse_bool(key, v);
  else if (key == "use_observer") cfg.use_observer = parse_bool(key, v);
  else if (key == "with_accuracy") cfg.with_accuracy = parse_bool(key, v);
  else if (key == "oracle_check_steps") cfg.oracle_check_steps = parse_int(key, v);
  else if (key == "eps_q") cfg.solver.eps_q = parse_double(key, v);
  else if (key == "max_iter") cfg.solver.max_iter = parse_int(key, v);
  else if (key == "drop_rule") cfg.solver.drop_rule = parse_drop_rule(v);
  else throw Error(Errc::InvalidArgument, "unknown config key '" + key + "'");
}

void apply_config_file(BenchmarkConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open config '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    apply_config_entry(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

}  // namespace imuqp::cli
