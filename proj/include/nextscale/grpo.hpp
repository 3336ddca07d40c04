#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nextscale/schedule.hpp"

namespace nextscale::grpo {

// One group of rollouts for the same prompt. Per-token log-probs are
// already summed within each scale, giving G x T matrices (T = scale
// count) under the current policy, the behavior policy that sampled
// the rollouts, and the frozen reference policy.
struct RolloutGroup {
  std::vector<double> rewards;                         // G
  std::vector<std::vector<double>> logprobs_new;       // G x T
  std::vector<std::vector<double>> logprobs_old;       // G x T
  std::vector<std::vector<double>> logprobs_ref;       // G x T
};

struct GrpoConfig {
  double epsilon = 0.2;               // clip radius, > 0
  double beta = 0.0;                  // KL coefficient, >= 0
  std::size_t prefix_len = 0;         // m: scales 1..m are trainable
  std::vector<double> scale_weights;  // k_t, at least prefix_len entries
  // The KL penalty normally covers only the trainable prefix, which
  // keeps the objective exactly independent of frozen scales. Set to
  // true to extend it over all T scales for comparison.
  bool kl_full_range = false;
};

// Group-normalized advantages: (R_i - mean) / max(std, 1e-8) with the
// population standard deviation, so any group with spread is normalized
// to unit std exactly and an all-equal group yields zero advantages
// instead of an error. Throws std::invalid_argument for fewer than two
// rewards or non-finite ones.
std::vector<double> group_advantages(std::span<const double> rewards);

struct ScaleDiagnostics {
  double mean_ratio = 0.0;     // mean over rollouts of rho = exp(new - old)
  double clip_fraction = 0.0;  // fraction where clipping strictly lowered the term
};

struct GrpoResult {
  double objective = 0.0;  // surrogate - beta * kl
  double surrogate = 0.0;
  double kl = 0.0;         // exp(ref-new) - (ref-new) - 1, averaged over the group
  // Diagnostics per scale; entries past the trainable prefix stay zero.
  std::vector<ScaleDiagnostics> per_scale;
  // d objective / d logprobs_new, same G x T shape. Exactly zero past
  // the prefix, which is the testable form of scale freezing.
  std::vector<std::vector<double>> d_new;
};

// Clipped surrogate over the trainable prefix:
//   (1/G) sum_i sum_{t<=m} k_t * min(rho*A_i, clip(rho, 1-eps, 1+eps)*A_i)
//   - beta * KL
// with rho the per-scale probability ratio new/old. Throws
// std::invalid_argument on shape mismatch, invalid config, or any
// non-finite log-prob.
GrpoResult grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg);

// 0/1 weights freezing everything past the first m scales.
std::vector<double> prefix_mask(std::size_t num_scales, std::size_t prefix_len);

// Default k_t: area-reweighted loss weights of the m-step prefix of a
// schedule, normalized over that prefix.
std::vector<double> default_scale_weights(const schedule::ScaleSchedule& sched,
                                          std::size_t prefix_len, double alpha);

}  // namespace nextscale::grpo
