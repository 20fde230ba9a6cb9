#include <doctest.h>

#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

#include "imuqp/cli_commands.hpp"
#include "imuqp/qp_file.hpp"
#include "support/random_qp.hpp"

using namespace imuqp;
using namespace imuqp::cli;
using imuqp::testing::Rng;

namespace {

const std::string kData = IMUQP_TEST_DATA_DIR;

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("imuqp_test_" + name);
  std::ofstream(path) << body;
  return path.string();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("QP document round trip") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto raw = imuqp::testing::random_feasible_qp(rng, rng.integer(1, 5), rng.integer(0, 9));
    const auto doc = from_problem(raw.problem());
    std::ostringstream os;
    write_qp_document(os, doc);
    const auto back = parse_qp_document(os.str());
    CHECK(back.n == doc.n);
    CHECK(back.p == doc.p);
    CHECK(back.e == doc.e);
    CHECK(back.f == doc.f);
    CHECK(back.m == doc.m);
    CHECK(back.gamma == doc.gamma);
  }
}

TEST_CASE("QP document parsing") {
  SUBCASE("comments and free layout") {
    const auto doc = parse_qp_document("# header\nn 2 p 1\nE 2 0\n 0 2 # diag\nF 1 1\nM 1 1 gamma 3\n");
    CHECK(doc.n == 2);
    CHECK(doc.e(1, 1) == 2.0);
    CHECK(doc.gamma(0) == 3.0);
  }
  SUBCASE("no constraints") {
    const auto doc = parse_qp_document("n 1\np 0\nE 2\nF 2\n");
    const auto sol = solve(to_problem(doc));
    CHECK(sol.theta(0) == -1.0);
  }
  SUBCASE("errors carry positions") {
    struct Case {
      std::string text;
      int line;
    };
    const std::vector<Case> cases{
        {"n 1\np 1\nE 2\nF x\nM 1\ngamma 0\n", 4},      // bad number
        {"n 1\np 1\nE 2\nF 2\nM 1\n", 6},               // missing gamma at end of input
        {"E 1\nn 1\np 0\n", 1},                        // E before the dimensions
        {"n 2\np 0\nE 1 2\n  3 1\nF 0 0\n", 4},         // asymmetric E
        {"n 1\np 0\nE 2\nE 2\nF 0\n", 4},               // duplicate section
        {"n 1\np 0\nE 2\nF 0\nfoo 1\n", 5},             // unknown keyword
    };
    for (const auto& c : cases) {
      CAPTURE(c.text);
      try {
        parse_qp_document(c.text);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == c.line);
        CHECK(e.column() >= 1);
        CHECK(e.code() == Errc::ParseError);
      }
    }
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_qp_file(kData + "/does_not_exist.qp"), Error);
  }
}

TEST_CASE("solve command") {
  std::ostringstream out, err;
  SUBCASE("single constraint") {
    CHECK(cmd_solve(kData + "/single_constraint.qp", {}, out, err) == kExitOptimal);
    CHECK(contains(out.str(), "status: optimal"));
    CHECK(contains(out.str(), "theta: -2\n"));
    CHECK(contains(out.str(), "lambda_active: 2\n"));
    CHECK(contains(out.str(), "dual_feasibility: 0\n"));
  }
  SUBCASE("infeasible triple") {
    CHECK(cmd_solve(kData + "/infeasible_triple.qp", {}, out, err) == kExitInfeasible);
    CHECK(contains(out.str(), "status: infeasible"));
    CHECK(contains(out.str(), "max(y): -1"));
    CHECK(contains(out.str(), "rejected constraint: 1"));
  }
  SUBCASE("no constraints") {
    const auto path = temp_file("free.qp", "n 2\np 0\nE 2 0 0 4\nF 2 4\n");
    CHECK(cmd_solve(path, {}, out, err) == kExitOptimal);
    CHECK(contains(out.str(), "theta: -1 -1\n"));
  }
  SUBCASE("iteration cap") {
    SolveOptions o;
    o.max_iter = 0;
    CHECK(cmd_solve(kData + "/single_constraint.qp", o, out, err) == kExitLimit);
  }
  SUBCASE("parse failure propagates") {
    const auto path = temp_file("bad.qp", "n 1\np 1\nE 2\n");
    CHECK_THROWS_AS(cmd_solve(path, {}, out, err), ParseError);
  }
}

TEST_CASE("exit codes are a function of status") {
  std::set<int> codes;
  for (auto s : {Status::Optimal, Status::Infeasible, Status::IterationLimit, Status::CycleGuardTripped})
    codes.insert(exit_code(s));
  CHECK(exit_code(Status::Optimal) == 0);
  CHECK(exit_code(Status::Infeasible) == 2);
  CHECK(exit_code(Status::IterationLimit) == 3);
  CHECK(exit_code(Status::CycleGuardTripped) == 3);
  CHECK(codes.size() == 3);
}

TEST_CASE("verify command") {
  std::ostringstream out, err;
  CHECK(cmd_verify(kData + "/random_3x8.qp", {}, out, err) == kExitOptimal);
  CHECK(contains(out.str(), "agreement: ok"));

  std::ostringstream out2;
  CHECK(cmd_verify(kData + "/single_constraint.qp", {}, out2, err) == kExitOptimal);

  std::ostringstream out3;
  CHECK(cmd_verify(kData + "/infeasible_triple.qp", {}, out3, err) == kExitOptimal);
  CHECK(contains(out3.str(), "unanimous infeasible"));

  Rng rng(62);
  const auto raw = imuqp::testing::random_feasible_qp(rng, 2, 17);
  std::ostringstream doc;
  write_qp_document(doc, from_problem(raw.problem()));
  std::ostringstream out4, err4;
  CHECK(cmd_verify(temp_file("big.qp", doc.str()), {}, out4, err4) == kExitUsage);
  CHECK(contains(err4.str(), "SizeLimit"));
}

TEST_CASE("footprint command") {
  std::ostringstream out;
  CHECK(cmd_footprint(1, 27, out) == 0);
  const auto s = out.str();
  CHECK(s.rfind("N,p,w,imuqp,qpoases\n", 0) == 0);
  CHECK(contains(s, "\n1,8,4,123,62\n"));
  CHECK(contains(s, "\n27,164,82,"));
  CHECK_THROWS_AS(cmd_footprint(0, 3, out), Error);
}

TEST_CASE("bench command") {
  BenchOptions o;
  o.base.n_masses = 2;
  o.base.horizon = 4;
  o.base.steps = 200;
  o.base.with_accuracy = false;
  SUBCASE("single run to stdout") {
    std::ostringstream out, err;
    CHECK(cmd_bench(o, out, err) == 0);
    std::istringstream in(out.str());
    std::string line;
    int rows = -1;  // column header
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 200);
    CHECK(contains(out.str(), "# horizon=4\n"));
  }
  SUBCASE("default config echo") {
    BenchmarkConfig d;
    CHECK(d.horizon == 27);
    CHECK(d.ts == 0.004);
    CHECK(d.q_weight == 210.0);
  }
  SUBCASE("horizon sweep summary") {
    o.sweep_n = {1, 6};
    o.base.steps = 40;
    o.k_a = 1;
    std::ostringstream out, err;
    CHECK(cmd_bench(o, out, err) == 0);
    std::istringstream in(out.str());
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') rows.push_back(line);
    REQUIRE(rows.size() == 7);
    for (Index n = 1; n <= 6; ++n) {
      std::stringstream ss(rows[static_cast<std::size_t>(n)]);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      CHECK(cells[0] == std::to_string(n));
      CHECK(cells[3] == std::to_string(2 * (n + 1) * 2 + 4 * n * 2));
    }
  }
  SUBCASE("output directory") {
    o.seeds = {1, 2};
    o.base.steps = 40;
    const auto dir = std::filesystem::temp_directory_path() / "imuqp_bench_out";
    std::filesystem::remove_all(dir);
    o.out_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_bench(o, out, err) == 0);
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "run_N4_seed1.csv"));
    CHECK(std::filesystem::exists(dir / "run_N4_seed2.csv"));
  }
}

TEST_CASE("argument helpers") {
  CHECK(parse_range("1..6") == std::pair<Index, Index>{1, 6});
  CHECK(parse_range("27") == std::pair<Index, Index>{27, 27});
  CHECK_THROWS_AS(parse_range("6..1"), Error);
  CHECK_THROWS_AS(parse_range("a..b"), Error);
  CHECK(parse_seed_list("1, 2,3") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_seed_list("1,x"), Error);
  CHECK(parse_drop_rule("ratio") == DropRule::RatioTest);
  CHECK(parse_drop_rule("most-negative") == DropRule::MostNegative);
  CHECK_THROWS_AS(parse_drop_rule("fastest"), Error);

  BenchmarkConfig cfg;
  apply_config_entry(cfg, "horizon", " 8");
  apply_config_entry(cfg, "reference", "constant");
  apply_config_entry(cfg, "held_reference", "true");
  CHECK(cfg.horizon == 8);
  CHECK(cfg.reference.kind == ReferenceSpec::Kind::Constant);
  CHECK(cfg.held_reference);
  CHECK_THROWS_AS(apply_config_entry(cfg, "bogus", "1"), Error);
  CHECK_THROWS_AS(apply_config_entry(cfg, "ts", "fast"), Error);

  const auto path = temp_file("bench.cfg", "# small\nmasses = 2\n\nsteps=10  # short\nts=0.01\n");
  apply_config_file(cfg, path);
  CHECK(cfg.n_masses == 2);
  CHECK(cfg.steps == 10);
  CHECK(cfg.ts == 0.01);
  CHECK_THROWS_AS(apply_config_file(cfg, temp_file("broken.cfg", "steps\n")), Error);
}
