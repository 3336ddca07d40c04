#include "nextscale/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nextscale::loss {

ScaleWeights scale_weights(const schedule::ScaleSchedule& sched, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("scale_weights: alpha must be >= 0");
  if (sched.steps.empty()) throw std::invalid_argument("scale_weights: empty schedule");

  ScaleWeights out;
  out.alpha = alpha;
  double weighted_tokens = 0.0;  // sum raw_s * n_s
  long long total_tokens = 0;    // sum n_s
  for (const auto& step : sched.steps) {
    double n = static_cast<double>(step.area());
    double raw = std::pow(n, -alpha);
    out.raw.push_back(raw);
    weighted_tokens += raw * n;
    total_tokens += step.area();
  }
  double scale = static_cast<double>(total_tokens) / weighted_tokens;
  out.normalized.reserve(out.raw.size());
  for (double raw : out.raw) out.normalized.push_back(raw * scale);
  return out;
}

namespace {

void check_batch(std::span<const double> logits, int vocab,
                 std::span<const std::int32_t> targets,
                 std::span<const double> token_weights) {
  if (vocab < 1) throw std::invalid_argument("weighted_ce: vocab must be positive");
  if (logits.size() != targets.size() * static_cast<std::size_t>(vocab)) {
    throw std::invalid_argument("weighted_ce: logits size must be targets * vocab");
  }
  if (targets.size() != token_weights.size()) {
    throw std::invalid_argument("weighted_ce: one weight per target required");
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] < 0 || targets[t] >= vocab) {
      throw std::invalid_argument("weighted_ce: target outside vocabulary");
    }
    if (!(token_weights[t] >= 0.0)) {
      throw std::invalid_argument("weighted_ce: weights must be non-negative");
    }
  }
}

// -log softmax(row)[target], computed stably via the max-shifted
// log-sum-exp.
double neg_log_softmax_at(const double* row, int vocab, std::int32_t target) {
  double m = row[0];
  for (int v = 1; v < vocab; ++v) m = std::max(m, row[v]);
  double sum = 0.0;
  for (int v = 0; v < vocab; ++v) sum += std::exp(row[v] - m);
  return std::log(sum) - (row[target] - m);
}

}  // namespace

double weighted_ce(std::span<const double> logits, int vocab,
                   std::span<const std::int32_t> targets,
                   std::span<const double> token_weights) {
  check_batch(logits, vocab, targets, token_weights);
  double weight_sum = 0.0;
  double acc = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double w = token_weights[t];
    if (w == 0.0) continue;
    acc += w * neg_log_softmax_at(logits.data() + t * vocab, vocab, targets[t]);
    weight_sum += w;
  }
  return weight_sum > 0.0 ? acc / weight_sum : 0.0;
}

std::vector<double> weighted_ce_grad(std::span<const double> logits, int vocab,
                                     std::span<const std::int32_t> targets,
                                     std::span<const double> token_weights) {
  check_batch(logits, vocab, targets, token_weights);
  double weight_sum = 0.0;
  for (double w : token_weights) weight_sum += w;

  std::vector<double> grad(logits.size(), 0.0);
  if (weight_sum <= 0.0) return grad;

  for (std::size_t t = 0; t < targets.size(); ++t) {
    double w = token_weights[t];
    if (w == 0.0) continue;
    const double* row = logits.data() + t * vocab;
    double* g = grad.data() + t * vocab;
    double m = row[0];
    for (int v = 1; v < vocab; ++v) m = std::max(m, row[v]);
    double sum = 0.0;
    for (int v = 0; v < vocab; ++v) sum += std::exp(row[v] - m);
    double coeff = w / weight_sum;
    for (int v = 0; v < vocab; ++v) g[v] = coeff * (std::exp(row[v] - m) / sum);
    g[targets[t]] -= coeff;
  }
  return grad;
}

}  // namespace nextscale::loss
