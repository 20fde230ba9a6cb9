#include <doctest.h>

#include <initializer_list>

#include "imuqp/complexity.hpp"

using namespace imuqp;

namespace {

// Per-step operation counts summed row by row, doubled so the half-integer
// rows stay integral.
std::int64_t flops_by_step_x2(std::int64_t n, std::int64_t p, std::int64_t c, std::int64_t tl, std::int64_t ta,
                              std::int64_t tr) {
  const std::int64_t once = 2 * (2 * n * n) + 2 * (2 * p * n) + 2 * p + 2 * 2 + 2 * (2 * n * n + n * (2 * c + 1));
  const std::int64_t any_add = 2 * (2 * c * c + 3 * c + 1) + 2 * c + 2 * p * (2 * c + 1) + 2 * p;
  const std::int64_t swap_only = 2 * c + c + 2 * (4 * c * c + 5 * c + 1) + 2 * (4 * c * c + 10 * c + 4);
  const std::int64_t plain_only = 2 * (2 * c * c + 5 * c + 2);
  const std::int64_t removal = c + 2 * (4 * c * c + 5 * c + 1) + 2 * c;
  return once + (tl + ta) * any_add + tl * swap_only + ta * plain_only + tr * removal;
}

}  // namespace

TEST_CASE("operation count") {
  CHECK(predicted_flops({1, 8, 0, 0, 0, 0}) == 31.0);
  for (std::int64_t n = 1; n <= 10; ++n)
    for (std::int64_t p : {2, 8, 30})
      CHECK(predicted_flops({n, p, 0, 0, 0, 0}) == double(4 * n * n + n * (2 * p + 1) + p + 2));

  const auto v = predicted_flops({27, 164, 10, 0, 1, 0});
  const double expect = 4.0 * 27 * 27 + 27.0 * (2 * (164 + 10) + 1) + 164 + 2 +
                        (4.0 * 100 + 9 * 10 + 2 * 164 * 11 + 3);
  CHECK(v == expect);

  for (std::int64_t c = 0; c < 12; ++c)
    for (std::int64_t tl = 0; tl < 3; ++tl)
      for (std::int64_t tr = 0; tr < 3; ++tr)
        CHECK(predicted_flops_x2({27, 164, c, tl, 5, tr}) == flops_by_step_x2(27, 164, c, tl, 5, tr));
  CHECK_THROWS(predicted_flops({1, -1, 0, 0, 0, 0}));
}

TEST_CASE("memory footprint") {
  const auto fp = memory_footprint(1);
  CHECK(fp.imuqp == 123);
  CHECK(fp.qpoases == 62);
  CHECK(mpc_constraint_count(27, 1, 1) == 164);
  CHECK(mpc_constraint_count(27, 1, 1) / 2 == 82);
  CHECK(mpc_constraint_count(27, 6, 6) == 984);
  CHECK(mpc_constraint_count(1, 1, 1) == 8);

  const auto big = memory_footprint(100000);
  const double ratio = double(big.imuqp) / double(big.qpoases);
  CHECK(ratio == doctest::Approx(5.2).epsilon(1e-4));
  CHECK_THROWS(memory_footprint(0));
}

TEST_CASE("memory footprint from the per-array accounting") {
  for (std::int64_t n = 1; n <= 40; ++n) {
    const std::int64_t p = mpc_constraint_count(n, 1, 1);
    const std::int64_t w = p / 2;
    // problem data E, F, M, gamma plus the solver buffers
    const std::int64_t shared = n * n + n + p * n + p;
    const std::int64_t imuqp = shared + p * p + n + 2 * p + w * w + 2 * w;
    const std::int64_t qpoases = shared + 3 * n * n + 5 * n + 4 * p + 4;
    const auto fp = memory_footprint(n);
    CHECK(fp.imuqp == imuqp);
    CHECK(fp.qpoases == qpoases);
  }
}
