#include <CLI11.hpp>

#include <iostream>

#include "imuqp/cli_commands.hpp"

using namespace imuqp;

int main(int argc, char** argv) {
  CLI::App app{"Dense active-set QP solver with inverse updates, and an MPC benchmark harness"};
  app.require_subcommand(1);

  cli::SolveOptions solve_opts;
  std::string qp_path;
  std::optional<Index> max_iter;
  std::string report;
  std::string drop_rule;

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("file", qp_path, "QP file")->required();
    sub->add_option("--eps-q", solve_opts.eps_q, "linear-dependence threshold on q")->capture_default_str();
    sub->add_option("--max-iter", max_iter, "iteration limit (default 3p)");
    sub->add_option("--drop-rule", drop_rule, "ratio (default) or most-negative");
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve a QP file");
  add_solver_flags(solve_cmd);
  solve_cmd->add_option("--report", report, "extra report sections (kkt)");
  auto* verify_cmd = app.add_subcommand("verify", "cross-check a small QP file against the reference solvers");
  add_solver_flags(verify_cmd);

  auto* bench_cmd = app.add_subcommand("bench", "closed-loop chain-of-masses benchmark");
  std::string config_path, sweep, seeds, out_dir;
  std::optional<Index> masses, horizon, steps, oracle_steps;
  std::optional<std::uint64_t> seed;
  std::optional<double> bench_eps_q;
  std::optional<Index> bench_max_iter;
  std::string bench_report;
  Index k_a = 33;
  unsigned threads = 0;
  bool held = false, observer = false;
  bench_cmd->add_option("--config", config_path, "key=value config file");
  bench_cmd->add_option("--masses", masses, "number of masses");
  bench_cmd->add_option("--N", horizon, "prediction horizon");
  bench_cmd->add_option("--steps", steps, "closed-loop samples");
  bench_cmd->add_option("--seed", seed, "initial-condition seed");
  bench_cmd->add_option("--seeds", seeds, "comma-separated seeds, one run each");
  bench_cmd->add_option("--sweep-N", sweep, "horizon range a..b, one run each");
  bench_cmd->add_option("--out", out_dir, "directory for per-run CSVs and summary.csv");
  bench_cmd->add_option("--eps-q", bench_eps_q, "linear-dependence threshold on q");
  bench_cmd->add_option("--max-iter", bench_max_iter, "iteration limit per QP (default 3p)");
  bench_cmd->add_option("--drop-rule", drop_rule, "ratio (default) or most-negative");
  bench_cmd->add_option("--report", bench_report, "kkt: compute accuracy measures per step");
  bench_cmd->add_option("--oracle-steps", oracle_steps, "steps re-solved by the primal oracle");
  bench_cmd->add_option("--ka", k_a, "first sample of the aggregation window")->capture_default_str();
  bench_cmd->add_option("--threads", threads, "worker threads for sweeps (0 = all cores)");
  bench_cmd->add_flag("--held-reference", held, "hold r(t) over the horizon");
  bench_cmd->add_flag("--observer", observer, "feed the controller from a state observer");

  auto* fp_cmd = app.add_subcommand("footprint", "memory footprint table");
  std::string fp_range = "1..40";
  fp_cmd->add_option("--N", fp_range, "horizon or range a..b")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kExitUsage;
  }

  try {
    if (solve_cmd->parsed() || verify_cmd->parsed()) {
      solve_opts.max_iter = max_iter;
      solve_opts.report_kkt = report == "kkt";
      if (!drop_rule.empty()) solve_opts.drop_rule = cli::parse_drop_rule(drop_rule);
      return solve_cmd->parsed() ? cli::cmd_solve(qp_path, solve_opts, std::cout, std::cerr)
                                 : cli::cmd_verify(qp_path, solve_opts, std::cout, std::cerr);
    }
    if (bench_cmd->parsed()) {
      cli::BenchOptions b;
      b.base.with_accuracy = false;
      if (!config_path.empty()) cli::apply_config_file(b.base, config_path);
      if (masses) b.base.n_masses = *masses;
      if (horizon) b.base.horizon = *horizon;
      if (steps) b.base.steps = *steps;
      if (seed) b.base.seed = *seed;
      if (bench_eps_q) b.base.solver.eps_q = *bench_eps_q;
      if (bench_max_iter) b.base.solver.max_iter = *bench_max_iter;
      if (oracle_steps) b.base.oracle_check_steps = *oracle_steps;
      if (!drop_rule.empty()) b.base.solver.drop_rule = cli::parse_drop_rule(drop_rule);
      if (bench_report == "kkt") b.base.with_accuracy = true;
      if (held) b.base.held_reference = true;
      if (observer) b.base.use_observer = true;
      if (!sweep.empty()) b.sweep_n = cli::parse_range(sweep);
      if (!seeds.empty()) b.seeds = cli::parse_seed_list(seeds);
      if (!out_dir.empty()) b.out_dir = out_dir;
      b.k_a = k_a;
      b.threads = threads;
      return cli::cmd_bench(b, std::cout, std::cerr);
    }
    if (fp_cmd->parsed()) {
      const auto [lo, hi] = cli::parse_range(fp_range);
      return cli::cmd_footprint(lo, hi, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
  return cli::kExitUsage;
}
