#include "nextscale/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nextscale/loss.hpp"

namespace nextscale::grpo {

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group_advantages: need at least two rollouts");
  }
  double mean = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("group_advantages: non-finite reward");
    mean += r;
  }
  mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rewards.size());
  // Exact normalization whenever the group has spread; the floor only
  // rescues zero-variance groups, turning them into zero advantages
  // instead of a division by zero.
  double denom = std::max(std::sqrt(var), 1e-8);

  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
  return out;
}

namespace {

void check_group(const RolloutGroup& group, const GrpoConfig& cfg, std::size_t* num_scales) {
  std::size_t g = group.rewards.size();
  if (g < 2) throw std::invalid_argument("grpo_objective: need at least two rollouts");
  if (group.logprobs_new.size() != g || group.logprobs_old.size() != g ||
      group.logprobs_ref.size() != g) {
    throw std::invalid_argument("grpo_objective: log-prob matrices must have one row per rollout");
  }
  std::size_t t = group.logprobs_new.empty() ? 0 : group.logprobs_new[0].size();
  for (std::size_t i = 0; i < g; ++i) {
    if (group.logprobs_new[i].size() != t || group.logprobs_old[i].size() != t ||
        group.logprobs_ref[i].size() != t) {
      throw std::invalid_argument("grpo_objective: ragged log-prob matrix");
    }
    for (std::size_t s = 0; s < t; ++s) {
      if (!std::isfinite(group.logprobs_new[i][s]) || !std::isfinite(group.logprobs_old[i][s]) ||
          !std::isfinite(group.logprobs_ref[i][s])) {
        throw std::invalid_argument("grpo_objective: non-finite log-prob");
      }
    }
  }
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("grpo_objective: epsilon must be > 0");
  if (!(cfg.beta >= 0.0)) throw std::invalid_argument("grpo_objective: beta must be >= 0");
  if (cfg.prefix_len < 1 || cfg.prefix_len > t) {
    throw std::invalid_argument("grpo_objective: prefix length must be in [1, T]");
  }
  if (cfg.scale_weights.size() < cfg.prefix_len) {
    throw std::invalid_argument("grpo_objective: need a scale weight per trainable scale");
  }
  *num_scales = t;
}

}  // namespace

GrpoResult grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg) {
  std::size_t num_scales = 0;
  check_group(group, cfg, &num_scales);
  std::size_t g = group.rewards.size();
  std::size_t m = cfg.prefix_len;

  std::vector<double> advantages = group_advantages(group.rewards);
  GrpoResult result;
  result.per_scale.assign(num_scales, {});
  result.d_new.assign(g, std::vector<double>(num_scales, 0.0));

  double inv_g = 1.0 / static_cast<double>(g);
  std::size_t kl_scales = cfg.kl_full_range ? num_scales : m;

  for (std::size_t t = 0; t < num_scales; ++t) {
    double ratio_sum = 0.0;
    int clipped = 0;
    for (std::size_t i = 0; i < g; ++i) {
      double rho = std::exp(group.logprobs_new[i][t] - group.logprobs_old[i][t]);
      double a = advantages[i];

      if (t < m) {
        double unclipped = rho * a;
        double clamped = std::clamp(rho, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon) * a;
        double k = cfg.scale_weights[t];
        if (clamped < unclipped) {
          result.surrogate += inv_g * k * clamped;
          ++clipped;
          // The clipped branch is constant in the new log-prob.
        } else {
          result.surrogate += inv_g * k * unclipped;
          result.d_new[i][t] += inv_g * k * rho * a;
        }
        ratio_sum += rho;
      }

      if (t < kl_scales) {
        double delta = group.logprobs_ref[i][t] - group.logprobs_new[i][t];
        result.kl += inv_g * (std::exp(delta) - delta - 1.0);
        if (cfg.beta > 0.0) {
          result.d_new[i][t] -= cfg.beta * inv_g * (1.0 - std::exp(delta));
        }
      }
    }
    if (t < m) {
      result.per_scale[t].mean_ratio = ratio_sum * inv_g;
      result.per_scale[t].clip_fraction = static_cast<double>(clipped) * inv_g;
    }
  }

  result.objective = result.surrogate - cfg.beta * result.kl;
  return result;
}

std::vector<double> prefix_mask(std::size_t num_scales, std::size_t prefix_len) {
  if (prefix_len < 1 || prefix_len > num_scales) {
    throw std::invalid_argument("prefix_mask: prefix length must be in [1, T]");
  }
  std::vector<double> mask(num_scales, 0.0);
  std::fill(mask.begin(), mask.begin() + prefix_len, 1.0);
  return mask;
}

std::vector<double> default_scale_weights(const schedule::ScaleSchedule& sched,
                                          std::size_t prefix_len, double alpha) {
  if (prefix_len < 1 || prefix_len > sched.steps.size()) {
    throw std::invalid_argument("default_scale_weights: prefix length must be in [1, T]");
  }
  schedule::ScaleSchedule prefix = sched;
  prefix.steps.assign(sched.steps.begin(), sched.steps.begin() + prefix_len);
  return loss::scale_weights(prefix, alpha).normalized;
}

}  // namespace nextscale::grpo
