#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nextscale/schedule.hpp"

namespace nextscale::loss {

// Per-scale loss weights for one schedule. raw[s] = (h_s*w_s)^(-alpha)
// down-weights fine scales, which would otherwise dominate the loss by
// sheer token count. normalized rescales raw so the token-weighted sum
// is unchanged: sum_s normalized[s]*n_s == sum_s n_s for n_s = h_s*w_s,
// keeping the total vision loss constant while shifting emphasis.
struct ScaleWeights {
  double alpha = 0.0;
  std::vector<double> raw;
  std::vector<double> normalized;
};

ScaleWeights scale_weights(const schedule::ScaleSchedule& sched, double alpha);

// Weighted mean cross-entropy:
//   (sum_t w_t * (-log softmax(logits_t)[target_t])) / (sum_t w_t)
// logits is token-major with `vocab` scores per token. Zero total
// weight (including an empty batch) gives 0. Throws
// std::invalid_argument on shape mismatch, a target outside
// [0, vocab), or a negative weight.
double weighted_ce(std::span<const double> logits, int vocab,
                   std::span<const std::int32_t> targets,
                   std::span<const double> token_weights);

// Analytic gradient of weighted_ce with respect to the logits:
// row t is (w_t / sum w) * (softmax(logits_t) - onehot(target_t)).
// Same shape and layout as logits.
std::vector<double> weighted_ce_grad(std::span<const double> logits, int vocab,
                                     std::span<const std::int32_t> targets,
                                     std::span<const double> token_weights);

}  // namespace nextscale::loss
