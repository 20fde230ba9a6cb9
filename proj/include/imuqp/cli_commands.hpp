#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "imuqp/benchmark.hpp"

namespace imuqp::cli {

enum ExitCode : int {
  kExitOptimal = 0,
  kExitUsage = 1,
  kExitInfeasible = 2,
  kExitLimit = 3,
  kExitMismatch = 4,
};

int exit_code(Status s);

struct SolveOptions {
  double eps_q = 1e-11;
  std::optional<Index> max_iter;
  bool report_kkt = false;
  DropRule drop_rule = DropRule::RatioTest;
};

int cmd_solve(const std::string& path, const SolveOptions& opts, std::ostream& out, std::ostream& err);

/// Cross-checks the solver against Hildreth and active-set enumeration.
/// 0 on agreement, 4 on disagreement, 1 on input or size errors.
int cmd_verify(const std::string& path, const SolveOptions& opts, std::ostream& out, std::ostream& err);

struct BenchOptions {
  BenchmarkConfig base;
  std::optional<std::pair<Index, Index>> sweep_n;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> out_dir;
  Index k_a = 33;
  unsigned threads = 0;
};

/// A single run without --out writes its CSV to `out`. Several runs without
/// --out execute sequentially and print only the summary table.
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

/// Rows N,p,w,imuqp,qpoases for N in [lo, hi].
int cmd_footprint(Index lo, Index hi, std::ostream& out);

/// "ratio" or "most-negative".
DropRule parse_drop_rule(const std::string& text);

/// "a..b" or a single integer.
std::pair<Index, Index> parse_range(const std::string& text);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Applies one `key=value` setting; throws InvalidArgument on unknown keys.
void apply_config_entry(BenchmarkConfig& cfg, const std::string& key, const std::string& value);
/// Reads `key=value` lines (blank lines and `#` comments ignored).
void apply_config_file(BenchmarkConfig& cfg, const std::string& path);

}  // namespace imuqp::cli
