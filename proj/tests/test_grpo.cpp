#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "nextscale/grpo.hpp"
#include "nextscale/rng.hpp"
#include "nextscale/schedule.hpp"

using namespace nextscale;
using namespace nextscale::grpo;

namespace {

RolloutGroup random_group(std::size_t g, std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  RolloutGroup group;
  group.rewards.resize(g);
  for (double& r : group.rewards) r = rng.next_gaussian();
  auto fill = [&](std::vector<std::vector<double>>& m) {
    m.assign(g, std::vector<double>(t));
    for (auto& row : m) {
      for (double& v : row) v = -1.0 + 0.3 * rng.next_gaussian();
    }
  };
  fill(group.logprobs_new);
  fill(group.logprobs_old);
  fill(group.logprobs_ref);
  return group;
}

}  // namespace

TEST_CASE("advantages: two-point and hand-computed groups") {
  // Normalization is exact for any group with spread, not approximate.
  auto two = group_advantages(std::vector<double>{1.0, 0.0});
  CHECK(two[0] == 1.0);
  CHECK(two[1] == -1.0);

  auto three = group_advantages(std::vector<double>{3.0, 1.0, 2.0});
  double sigma = std::sqrt(2.0 / 3.0);
  CHECK(three[0] == 1.0 / sigma);
  CHECK(three[1] == -1.0 / sigma);
  CHECK(three[2] == 0.0);
}

TEST_CASE("advantages: degenerate groups and validation") {
  auto flat = group_advantages(std::vector<double>{2.5, 2.5, 2.5, 2.5});
  for (double a : flat) CHECK(a == 0.0);

  CHECK_THROWS_AS(group_advantages(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(group_advantages(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(group_advantages(std::vector<double>{1.0, std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("advantages: normalized statistics over many random groups") {
  Rng rng(808);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t g = 2 + rng.next_below(14);
    std::vector<double> rewards(g);
    for (double& r : rewards) r = rng.next_gaussian() * 3.0 + 1.0;
    auto adv = group_advantages(rewards);

    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(g);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(g);

    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
  }
}

TEST_CASE("prefix mask") {
  auto m = prefix_mask(18, 8);
  REQUIRE(m.size() == 18);
  for (std::size_t t = 0; t < 18; ++t) CHECK(m[t] == (t < 8 ? 1.0 : 0.0));
  CHECK(prefix_mask(5, 5) == std::vector<double>(5, 1.0));
  CHECK(prefix_mask(5, 1) == std::vector<double>{1, 0, 0, 0, 0});
  CHECK_THROWS_AS(prefix_mask(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(prefix_mask(5, 6), std::invalid_argument);
}

TEST_CASE("objective: identical policies reduce to weighted advantage sum") {
  RolloutGroup group = random_group(4, 6, 99);
  group.logprobs_old = group.logprobs_new;  // rho = 1 everywhere

  GrpoConfig cfg;
  cfg.epsilon = 0.2;
  cfg.beta = 0.0;
  cfg.prefix_len = 4;
  cfg.scale_weights = {0.5, 1.0, 1.5, 2.0};

  auto adv = group_advantages(group.rewards);
  double expect = 0.0;
  for (double a : adv) expect += a * (0.5 + 1.0 + 1.5 + 2.0);
  expect /= static_cast<double>(group.rewards.size());

  auto result = grpo_objective(group, cfg);
  CHECK(result.objective == doctest::Approx(expect).epsilon(1e-12));
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(result.per_scale[t].mean_ratio == doctest::Approx(1.0));
    CHECK(result.per_scale[t].clip_fraction == 0.0);
  }
}

TEST_CASE("objective: zero advantages give zero surrogate") {
  RolloutGroup group = random_group(3, 5, 100);
  group.rewards = {1.0, 1.0, 1.0};
  GrpoConfig cfg;
  cfg.prefix_len = 5;
  cfg.scale_weights.assign(5, 1.0);
  auto result = grpo_objective(group, cfg);
  CHECK(result.objective == doctest::Approx(0.0));
}

TEST_CASE("objective: hand-traced clipping case") {
  // Two rollouts, three scales, trainable prefix 2. Rewards 1 and 0
  // give advantages exactly +1 and -1.
  RolloutGroup group;
  group.rewards = {1.0, 0.0};
  // Scale log-prob deltas chosen for ratios:
  //   rollout 0: rho = 1.5 (clipped high), rho = 1.0
  //   rollout 1: rho = 1.0, rho = 0.5 (clipped low, but A < 0 so the
  //              min keeps the unclipped branch)
  double l15 = std::log(1.5);
  double l05 = std::log(0.5);
  group.logprobs_old = {{-1.0, -1.0, -1.0}, {-1.0, -1.0, -1.0}};
  group.logprobs_new = {{-1.0 + l15, -1.0, -1.0}, {-1.0, -1.0 + l05, -1.0}};
  group.logprobs_ref = group.logprobs_new;

  GrpoConfig cfg;
  cfg.epsilon = 0.2;
  cfg.beta = 0.0;
  cfg.prefix_len = 2;
  cfg.scale_weights = {1.0, 1.0};

  double a0 = 1.0;   // advantage of rollout 0
  double a1 = -1.0;  // advantage of rollout 1
  // rollout 0: min(1.5*a0, 1.2*a0) = 1.2*a0 (clipped); then min(a0, a0) = a0
  // rollout 1: min(a1, a1) = a1; then with a1 < 0 the clipped value
  //   0.8*a1 lies below the raw 0.5*a1, so the min takes the clipped
  //   branch: min(-0.5, -0.8) = -0.8 (times |a1|).
  double expect = 0.5 * ((1.2 * a0 + a0) + (a1 + 0.8 * a1));
  auto result = grpo_objective(group, cfg);
  CHECK(result.objective == doctest::Approx(expect).epsilon(1e-9));
  CHECK(result.per_scale[0].clip_fraction == doctest::Approx(0.5));
  CHECK(result.per_scale[1].clip_fraction == doctest::Approx(0.5));
  CHECK(result.per_scale[0].mean_ratio == doctest::Approx((1.5 + 1.0) / 2.0));
}

TEST_CASE("objective: frozen scales beyond the prefix") {
  RolloutGroup group = random_group(5, 8, 111);
  GrpoConfig cfg;
  cfg.epsilon = 0.2;
  cfg.beta = 0.7;
  cfg.prefix_len = 3;
  cfg.scale_weights = {1.0, 1.0, 1.0};

  auto base = grpo_objective(group, cfg);

  RolloutGroup perturbed = group;
  Rng rng(222);
  for (auto& row : perturbed.logprobs_new) {
    for (std::size_t t = 3; t < row.size(); ++t) row[t] += rng.next_gaussian() * 10.0;
  }
  auto moved = grpo_objective(perturbed, cfg);
  CHECK(moved.objective == base.objective);  // exact, not approximate
  CHECK(moved.kl == base.kl);

  // Gradient view of the same freeze.
  for (const auto& row : base.d_new) {
    for (std::size_t t = 3; t < row.size(); ++t) CHECK(row[t] == 0.0);
  }

  // The full-range KL flag is the one deliberate exception.
  cfg.kl_full_range = true;
  auto full_base = grpo_objective(group, cfg);
  auto full_moved = grpo_objective(perturbed, cfg);
  CHECK(full_moved.objective != full_base.objective);
}

TEST_CASE("objective: clipping inactive inside the trust band") {
  RolloutGroup group = random_group(4, 4, 333);
  // Pull new close to old so every ratio is within [1-eps, 1+eps].
  for (std::size_t i = 0; i < group.logprobs_new.size(); ++i) {
    for (std::size_t t = 0; t < group.logprobs_new[i].size(); ++t) {
      group.logprobs_new[i][t] = group.logprobs_old[i][t] + 0.01;
    }
  }
  GrpoConfig cfg;
  cfg.epsilon = 0.2;
  cfg.prefix_len = 4;
  cfg.scale_weights.assign(4, 1.0);
  auto result = grpo_objective(group, cfg);
  for (const auto& d : result.per_scale) CHECK(d.clip_fraction == 0.0);
}

TEST_CASE("objective: scale weights act linearly on the surrogate") {
  RolloutGroup group = random_group(6, 5, 444);
  GrpoConfig cfg;
  cfg.epsilon = 0.2;
  cfg.beta = 0.0;
  cfg.prefix_len = 5;
  cfg.scale_weights.assign(5, 1.0);
  auto base = grpo_objective(group, cfg);
  for (double& k : cfg.scale_weights) k = 3.0;
  auto scaled = grpo_objective(group, cfg);
  CHECK(scaled.objective == doctest::Approx(3.0 * base.objective).epsilon(1e-12));
}

TEST_CASE("objective: KL estimator value and gradient sign") {
  RolloutGroup group = random_group(3, 2, 555);
  group.logprobs_old = group.logprobs_new;
  group.rewards = {1.0, 1.0, 1.0};  // zero advantages isolate the KL term

  GrpoConfig cfg;
  cfg.epsilon = 0.2;
  cfg.beta = 2.0;
  cfg.prefix_len = 2;
  cfg.scale_weights = {1.0, 1.0};

  double expect_kl = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t t = 0; t < 2; ++t) {
      double delta = group.logprobs_ref[i][t] - group.logprobs_new[i][t];
      expect_kl += std::exp(delta) - delta - 1.0;
    }
  }
  expect_kl /= 3.0;
  auto result = grpo_objective(group, cfg);
  CHECK(result.kl == doctest::Approx(expect_kl).epsilon(1e-12));
  CHECK(result.kl >= 0.0);  // estimator is pointwise non-negative
  CHECK(result.objective == doctest::Approx(-2.0 * expect_kl).epsilon(1e-12));
}

TEST_CASE("objective: analytic sensitivity matches finite differences") {
  const double step = 1e-6;
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    RolloutGroup group = random_group(4, 5, seed);
    GrpoConfig cfg;
    cfg.epsilon = 0.25;
    cfg.beta = 0.5;
    cfg.prefix_len = 3;
    cfg.scale_weights = {1.2, 1.0, 0.8};

    auto base = grpo_objective(group, cfg);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t t = 0; t < 5; ++t) {
        RolloutGroup up = group;
        up.logprobs_new[i][t] += step;
        RolloutGroup down = group;
        down.logprobs_new[i][t] -= step;
        double numeric = (grpo_objective(up, cfg).objective -
                          grpo_objective(down, cfg).objective) /
                         (2.0 * step);
        CHECK(base.d_new[i][t] == doctest::Approx(numeric).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("objective: input validation") {
  RolloutGroup group = random_group(3, 4, 666);
  GrpoConfig cfg;
  cfg.prefix_len = 2;
  cfg.scale_weights = {1.0, 1.0};

  SUBCASE("non-finite log-prob") {
    group.logprobs_new[1][2] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(grpo_objective(group, cfg), std::invalid_argument);
  }
  SUBCASE("ragged matrix") {
    group.logprobs_ref[0].pop_back();
    CHECK_THROWS_AS(grpo_objective(group, cfg), std::invalid_argument);
  }
  SUBCASE("prefix out of range") {
    cfg.prefix_len = 9;
    CHECK_THROWS_AS(grpo_objective(group, cfg), std::invalid_argument);
  }
  SUBCASE("missing scale weights") {
    cfg.scale_weights = {1.0};
    CHECK_THROWS_AS(grpo_objective(group, cfg), std::invalid_argument);
  }
  SUBCASE("bad epsilon") {
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(grpo_objective(group, cfg), std::invalid_argument);
  }
}

TEST_CASE("default scale weights come from the prefix of the area rule") {
  auto sched = schedule::select_schedule(1.0);
  auto k = default_scale_weights(sched, 8, 0.9);
  REQUIRE(k.size() == 8);
  // Token-weighted mass over the prefix is preserved.
  double weighted = 0.0;
  long long tokens = 0;
  for (std::size_t t = 0; t < 8; ++t) {
    weighted += k[t] * static_cast<double>(sched.steps[t].area());
    tokens += sched.steps[t].area();
  }
  CHECK(weighted == doctest::Approx(static_cast<double>(tokens)).epsilon(1e-12));
  CHECK_THROWS_AS(default_scale_weights(sched, 0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(default_scale_weights(sched, 19, 0.9), std::invalid_argument);
}
