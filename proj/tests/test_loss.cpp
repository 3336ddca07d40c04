#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nextscale/loss.hpp"
#include "nextscale/rng.hpp"
#include "nextscale/schedule.hpp"

using namespace nextscale;
using namespace nextscale::loss;

namespace {

schedule::ScaleSchedule two_step(int h1, int w1, int h2, int w2) {
  schedule::ScaleSchedule s;
  s.steps = {{h1, w1}, {h2, w2}};
  return s;
}

struct Batch {
  std::vector<double> logits;
  std::vector<std::int32_t> targets;
  std::vector<double> weights;
  int vocab;
};

Batch random_batch(int tokens, int vocab, std::uint64_t seed) {
  Batch b;
  b.vocab = vocab;
  Rng rng(seed);
  b.logits.resize(static_cast<std::size_t>(tokens) * vocab);
  for (double& v : b.logits) v = rng.next_gaussian() * 2.0;
  for (int t = 0; t < tokens; ++t) {
    b.targets.push_back(static_cast<std::int32_t>(rng.next_below(vocab)));
    b.weights.push_back(rng.next_unit() + 0.05);
  }
  return b;
}

}  // namespace

TEST_CASE("scale weights: exponent zero leaves everything at 1") {
  auto w = scale_weights(two_step(2, 2, 4, 4), 0.0);
  CHECK(w.raw == std::vector<double>{1.0, 1.0});
  CHECK(w.normalized[0] == doctest::Approx(1.0));
  CHECK(w.normalized[1] == doctest::Approx(1.0));
}

TEST_CASE("scale weights: raw ratio follows inverse area") {
  auto w = scale_weights(two_step(2, 2, 4, 4), 1.0);
  CHECK(w.raw[0] / w.raw[1] == doctest::Approx(4.0));

  // Strictly decreasing in area for any positive exponent.
  auto sq = scale_weights(schedule::select_schedule(1.0), 0.5);
  for (std::size_t k = 1; k < sq.raw.size(); ++k) {
    if (schedule::select_schedule(1.0).steps[k].area() >
        schedule::select_schedule(1.0).steps[k - 1].area()) {
      CHECK(sq.raw[k] < sq.raw[k - 1]);
    }
  }
}

TEST_CASE("scale weights: normalization preserves token-weighted mass") {
  for (double alpha : {0.0, 0.5, 0.9, 1.0}) {
    for (const auto& sched : schedule::builtin_schedules()) {
      auto w = scale_weights(sched, alpha);
      double weighted = 0.0;
      long long tokens = 0;
      for (std::size_t k = 0; k < sched.steps.size(); ++k) {
        weighted += w.normalized[k] * static_cast<double>(sched.steps[k].area());
        tokens += sched.steps[k].area();
      }
      CHECK(std::abs(weighted - static_cast<double>(tokens)) /
                static_cast<double>(tokens) <
            1e-12);
    }
  }
}

TEST_CASE("scale weights: the documented operating point") {
  // 12-step square schedule at the production exponent 0.9; verify
  // against a direct re-evaluation of the formula.
  auto sched = schedule::truncate_for_level(schedule::select_schedule(1.0), 256);
  auto w = scale_weights(sched, 0.9);
  REQUIRE(w.raw.size() == 12);

  double weighted = 0.0;
  double tokens = 0.0;
  for (std::size_t k = 0; k < sched.steps.size(); ++k) {
    double n = static_cast<double>(sched.steps[k].area());
    CHECK(w.raw[k] == doctest::Approx(std::pow(n, -0.9)).epsilon(1e-12));
    weighted += std::pow(n, -0.9) * n;
    tokens += n;
  }
  for (std::size_t k = 0; k < sched.steps.size(); ++k) {
    CHECK(w.normalized[k] ==
          doctest::Approx(w.raw[k] * tokens / weighted).epsilon(1e-12));
  }
  // Coarse scales end up above 1, fine scales below.
  CHECK(w.normalized.front() > 1.0);
  CHECK(w.normalized.back() < 1.0);
}

TEST_CASE("weighted cross-entropy basics") {
  SUBCASE("uniform logits give log(vocab)") {
    std::vector<double> logits(4, 0.7);
    std::vector<std::int32_t> targets{2};
    std::vector<double> weights{1.0};
    CHECK(weighted_ce(logits, 4, targets, weights) == doctest::Approx(std::log(4.0)));
  }
  SUBCASE("zero-weight tokens are as if absent") {
    Batch b = random_batch(6, 8, 303);
    Batch shorter = b;
    shorter.logits.resize(5 * 8);
    shorter.targets.resize(5);
    shorter.weights.resize(5);
    b.weights[5] = 0.0;
    CHECK(weighted_ce(b.logits, 8, b.targets, b.weights) ==
          doctest::Approx(weighted_ce(shorter.logits, 8, shorter.targets, shorter.weights)));
  }
  SUBCASE("empty batch is zero") {
    CHECK(weighted_ce({}, 4, {}, {}) == 0.0);
  }
  SUBCASE("shift invariance") {
    Batch b = random_batch(5, 7, 404);
    double before = weighted_ce(b.logits, 7, b.targets, b.weights);
    for (int t = 0; t < 5; ++t) {
      for (int v = 0; v < 7; ++v) b.logits[static_cast<std::size_t>(t) * 7 + v] += 13.5;
    }
    CHECK(weighted_ce(b.logits, 7, b.targets, b.weights) == doctest::Approx(before));
  }
  SUBCASE("matches a naive per-token evaluation") {
    Batch b = random_batch(10, 12, 505);
    double acc = 0.0;
    double wsum = 0.0;
    for (int t = 0; t < 10; ++t) {
      double denom = 0.0;
      for (int v = 0; v < 12; ++v) denom += std::exp(b.logits[static_cast<std::size_t>(t) * 12 + v]);
      double p = std::exp(b.logits[static_cast<std::size_t>(t) * 12 + b.targets[t]]) / denom;
      acc += b.weights[t] * -std::log(p);
      wsum += b.weights[t];
    }
    double got = weighted_ce(b.logits, 12, b.targets, b.weights);
    CHECK(std::abs(got - acc / wsum) / std::abs(acc / wsum) < 1e-12);
  }
}

TEST_CASE("weighted cross-entropy input validation") {
  std::vector<double> logits(8, 0.0);
  std::vector<std::int32_t> targets{1, 9};
  std::vector<double> weights{1.0, 1.0};
  CHECK_THROWS_AS(weighted_ce(logits, 4, targets, weights), std::invalid_argument);
  targets[1] = -1;
  CHECK_THROWS_AS(weighted_ce(logits, 4, targets, weights), std::invalid_argument);
  targets[1] = 0;
  weights[0] = -0.5;
  CHECK_THROWS_AS(weighted_ce(logits, 4, targets, weights), std::invalid_argument);
  weights[0] = 1.0;
  CHECK_THROWS_AS(weighted_ce(logits, 3, targets, weights), std::invalid_argument);
}

TEST_CASE("gradient: saturated logits vanish, rows sum to zero") {
  std::vector<double> logits{30.0, 0.0, 0.0, 0.0};
  std::vector<std::int32_t> targets{0};
  std::vector<double> weights{1.0};
  auto grad = weighted_ce_grad(logits, 4, targets, weights);
  double norm = 0.0;
  for (double g : grad) norm += g * g;
  CHECK(std::sqrt(norm) < 1e-9);

  Batch b = random_batch(7, 9, 606);
  auto g = weighted_ce_grad(b.logits, 9, b.targets, b.weights);
  for (int t = 0; t < 7; ++t) {
    double row = 0.0;
    for (int v = 0; v < 9; ++v) row += g[static_cast<std::size_t>(t) * 9 + v];
    CHECK(std::abs(row) < 1e-12);
  }
}

TEST_CASE("gradient matches central finite differences over 50 seeds") {
  const double step = 1e-5;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Batch b = random_batch(4, 6, seed * 101);
    auto grad = weighted_ce_grad(b.logits, b.vocab, b.targets, b.weights);

    for (std::size_t i = 0; i < b.logits.size(); i += 5) {  // probe a spread of entries
      std::vector<double> bumped = b.logits;
      bumped[i] += step;
      double up = weighted_ce(bumped, b.vocab, b.targets, b.weights);
      bumped[i] -= 2.0 * step;
      double down = weighted_ce(bumped, b.vocab, b.targets, b.weights);
      double numeric = (up - down) / (2.0 * step);
      double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
      CHECK(std::abs(numeric - grad[i]) / denom < 1e-4);
    }
  }
}
