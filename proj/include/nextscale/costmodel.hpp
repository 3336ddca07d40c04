#pragma once

#include <span>
#include <vector>

#include "nextscale/schedule.hpp"

namespace nextscale::cost {

// Setting for the analytic transformer FLOPs model. layers defaults to
// 1 because the reference totals fold the layer count out; prompt_len
// defaults to 100 conditioning tokens, the value the reference
// coefficients imply.
struct CostConfig {
  long long hidden = 2048;
  long long layers = 1;
  long long steps = 18;      // step count of the fixed-sequence baseline
  long long prompt_len = 100;
};

// Per-layer attention-plus-MLP cost of one decoding step:
// 12*s_q*h^2 + 4*s_q*s_kv*h. Exact integer arithmetic; totals past
// the signed 64-bit range throw std::overflow_error instead of
// wrapping.
long long flops_layer(long long s_q, long long s_kv, long long hidden);

// Fixed-sequence baseline that re-scores seq_len tokens every step:
// steps * layers * (12*seq_len*h^2 + 4*seq_len^2*h).
long long fixed_sequence_total(long long seq_len, const CostConfig& cfg);

// Progressive generation with KV caching: layers * sum over the
// schedule's accounting steps (including the prompt prefill) of
// flops_layer(s_q, s_kv, hidden).
long long nextscale_total(const schedule::ScaleSchedule& sched, const CostConfig& cfg);

// Totals above are linear in h once h^2 and h terms are separated:
// total = layers * (h2_coeff * h^2 + h1_coeff * h). Exposing the
// coefficients makes the closed forms directly checkable.
struct FlopsCoefficients {
  long long h2_coeff = 0;  // 12 * sum s_q
  long long h1_coeff = 0;  // 4 * sum s_q*s_kv
};
FlopsCoefficients nextscale_coefficients(const schedule::ScaleSchedule& sched,
                                         long long prompt_len);
FlopsCoefficients fixed_sequence_coefficients(long long seq_len, long long steps);

enum class CompareMode {
  uniform,    // square grids growing linearly to the target side
  realistic,  // built-in 1:1 schedule truncated to the matching level
};

struct CompareRow {
  int resolution = 0;  // final grid side
  int steps = 0;
  long long fixed_flops = 0;
  long long nextscale_flops = 0;
  double ratio = 0.0;  // fixed / next-scale
};

// Side-by-side cost of generating a side x side token grid with the
// fixed-sequence baseline vs. progressive scales, at matched step
// counts (12/16/18 for sides 16/32/64). Only those three sides map to
// built-in schedule endpoints; anything else throws
// std::invalid_argument.
std::vector<CompareRow> compare(std::span<const int> resolutions, CompareMode mode,
                                const CostConfig& cfg);

}  // namespace nextscale::cost
