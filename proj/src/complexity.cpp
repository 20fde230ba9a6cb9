#include "imuqp/complexity.hpp"

#include "imuqp/errors.hpp"

namespace imuqp {

std::int64_t predicted_flops_x2(const FlopInputs& in) {
  if (in.horizon < 0 || in.p < 0 || in.c < 0 || in.t_l < 0 || in.t_a < 0 || in.t_r < 0) {
    throw Error(Errc::InvalidArgument, "predicted_flops: inputs must be non-negative");
  }
  const std::int64_t n = in.horizon, p = in.p, c = in.c;
  const std::int64_t base = 2 * (4 * n * n + n * (2 * (p + c) + 1) + p + 2);
  const std::int64_t dep = 20 * c * c + 41 * c + 4 * p * (c + 1) + 12;
  const std::int64_t add = 8 * c * c + 18 * c + 4 * p * (c + 1) + 6;
  const std::int64_t rem = 8 * c * c + 13 * c + 2;
  return base + in.t_l * dep + in.t_a * add + in.t_r * rem;
}

double predicted_flops(const FlopInputs& in) {
  return static_cast<double>(predicted_flops_x2(in)) / 2.0;
}

MemoryFootprint memory_footprint(std::int64_t horizon) {
  if (horizon < 1) throw Error(Errc::InvalidArgument, "memory_footprint: N must be >= 1");
  const std::int64_t n = horizon;
  return {52 * n * n + 58 * n + 13, 10 * n * n + 38 * n + 14};
}

std::int64_t mpc_constraint_count(std::int64_t horizon, std::int64_t n_u, std::int64_t n_y) {
  return 2 * (horizon + 1) * n_y + 4 * horizon * n_u;
}

}  // namespace imuqp
