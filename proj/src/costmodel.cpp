#include "nextscale/costmodel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nextscale/engine.hpp"

namespace nextscale::cost {

namespace {

using int128 = __int128;

long long narrow(int128 v, const char* who) {
  if (v > static_cast<int128>(std::numeric_limits<long long>::max())) {
    throw std::overflow_error(std::string(who) + ": total exceeds 64-bit range");
  }
  return static_cast<long long>(v);
}

void check_config(const CostConfig& cfg, const char* who) {
  if (cfg.hidden < 1 || cfg.layers < 1 || cfg.steps < 0 || cfg.prompt_len < 0) {
    throw std::invalid_argument(std::string(who) + ": invalid cost config");
  }
}

int128 flops_layer128(int128 s_q, int128 s_kv, int128 h) {
  return 12 * s_q * h * h + 4 * s_q * s_kv * h;
}

}  // namespace

long long flops_layer(long long s_q, long long s_kv, long long hidden) {
  if (s_q < 0 || s_kv < 0 || hidden < 0) {
    throw std::invalid_argument("flops_layer: inputs must be non-negative");
  }
  return narrow(flops_layer128(s_q, s_kv, hidden), "flops_layer");
}

long long fixed_sequence_total(long long seq_len, const CostConfig& cfg) {
  check_config(cfg, "fixed_sequence_total");
  if (seq_len < 1) throw std::invalid_argument("fixed_sequence_total: seq_len must be >= 1");
  int128 per_step = flops_layer128(seq_len, seq_len, cfg.hidden);
  return narrow(static_cast<int128>(cfg.steps) * cfg.layers * per_step,
                "fixed_sequence_total");
}

long long nextscale_total(const schedule::ScaleSchedule& sched, const CostConfig& cfg) {
  check_config(cfg, "nextscale_total");
  int128 total = 0;
  for (const auto& account : engine::kv_accounting(sched, cfg.prompt_len)) {
    total += flops_layer128(account.s_q, account.s_kv, cfg.hidden);
  }
  return narrow(static_cast<int128>(cfg.layers) * total, "nextscale_total");
}

FlopsCoefficients nextscale_coefficients(const schedule::ScaleSchedule& sched,
                                         long long prompt_len) {
  int128 sum_q = 0;
  int128 sum_qkv = 0;
  for (const auto& account : engine::kv_accounting(sched, prompt_len)) {
    sum_q += account.s_q;
    sum_qkv += static_cast<int128>(account.s_q) * account.s_kv;
  }
  return {narrow(12 * sum_q, "nextscale_coefficients"),
          narrow(4 * sum_qkv, "nextscale_coefficients")};
}

FlopsCoefficients fixed_sequence_coefficients(long long seq_len, long long steps) {
  if (seq_len < 1 || steps < 0) {
    throw std::invalid_argument("fixed_sequence_coefficients: bad arguments");
  }
  int128 s = seq_len;
  return {narrow(12 * static_cast<int128>(steps) * s, "fixed_sequence_coefficients"),
          narrow(4 * static_cast<int128>(steps) * s * s, "fixed_sequence_coefficients")};
}

namespace {

int matched_steps(int side) {
  switch (side) {
    case 16: return 12;
    case 32: return 16;
    case 64: return 18;
    default:
      throw std::invalid_argument(
          "compare: resolution must be a built-in 1:1 endpoint (16, 32 or 64)");
  }
}

int level_for_side(int side) {
  switch (side) {
    case 16: return 256;
    case 32: return 512;
    default: return 1024;
  }
}

// Square grids whose side ramps linearly from 1 to `side` over `steps`
// steps, the idealized progression without extra low-scale steps.
schedule::ScaleSchedule uniform_schedule(int side, int steps) {
  schedule::ScaleSchedule s;
  s.aspect_ratio = 1.0;
  s.pixels_h = s.pixels_w = side * 16;
  for (int t = 0; t < steps; ++t) {
    double frac = steps > 1 ? static_cast<double>(t) / (steps - 1) : 1.0;
    int g = static_cast<int>(std::lround(1.0 + (side - 1) * frac));
    s.steps.push_back({g, g});
  }
  return s;
}

}  // namespace

std::vector<CompareRow> compare(std::span<const int> resolutions, CompareMode mode,
                                const CostConfig& cfg) {
  check_config(cfg, "compare");
  std::vector<CompareRow> rows;
  for (int side : resolutions) {
    int steps = matched_steps(side);

    schedule::ScaleSchedule sched;
    if (mode == CompareMode::realistic) {
      sched = schedule::truncate_for_level(schedule::select_schedule(1.0),
                                           level_for_side(side));
    } else {
      sched = uniform_schedule(side, steps);
    }

    CostConfig fixed_cfg = cfg;
    fixed_cfg.steps = steps;

    CompareRow row;
    row.resolution = side;
    row.steps = steps;
    row.fixed_flops = fixed_sequence_total(static_cast<long long>(side) * side, fixed_cfg);
    row.nextscale_flops = nextscale_total(sched, cfg);
    row.ratio = static_cast<double>(row.fixed_flops) / static_cast<double>(row.nextscale_flops);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nextscale::cost
