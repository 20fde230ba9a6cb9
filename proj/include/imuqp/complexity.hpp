#pragma once

#include <cstdint>

namespace imuqp {

/// Event-count inputs to the operation-count model. c is one representative
/// active-set size (callers typically pass c*).
struct FlopInputs {
  std::int64_t horizon = 0;  // N
  std::int64_t p = 0;
  std::int64_t c = 0;
  std::int64_t t_l = 0;
  std::int64_t t_a = 0;
  std::int64_t t_r = 0;
};

/// Twice the predicted arithmetic operation count. The polynomial has
/// half-integer coefficients, so the doubled value is an exact integer.
std::int64_t predicted_flops_x2(const FlopInputs& in);

/// Predicted arithmetic operation count of one solve.
double predicted_flops(const FlopInputs& in);

struct MemoryFootprint {
  std::int64_t imuqp = 0;
  std::int64_t qpoases = 0;
};

/// Stored scalars for a horizon-N problem with one input and one output
/// (p = 6N + 2, w = 3N + 1).
MemoryFootprint memory_footprint(std::int64_t horizon);

/// p = 2(N+1) n_y + 4 N n_u.
std::int64_t mpc_constraint_count(std::int64_t horizon, std::int64_t n_u, std::int64_t n_y);

}  // namespace imuqp
