#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "nextscale/schedule.hpp"

using namespace nextscale::schedule;

TEST_CASE("builtin table shape") {
  const auto& all = builtin_schedules();
  CHECK(all.size() == 41);

  std::set<std::string> labels;
  for (std::size_t i = 0; i < all.size(); ++i) {
    labels.insert(all[i].label());
    if (i > 0) CHECK(all[i].aspect_ratio > all[i - 1].aspect_ratio);
  }
  CHECK(labels.size() == all.size());
}

TEST_CASE("every builtin passes validation") {
  for (const auto& s : builtin_schedules()) {
    auto report = validate(s);
    CAPTURE(s.label());
    for (const auto& v : report.violations) CAPTURE(v);
    CHECK(report.ok());
  }
}

TEST_CASE("validation flags broken schedules") {
  ScaleSchedule base = select_schedule(1.0);

  SUBCASE("wrong first step") {
    base.steps[0] = {2, 2};
    auto report = validate(base);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].find("first step") != std::string::npos);
  }
  SUBCASE("shrinking area") {
    base.steps[5] = {1, 1};
    CHECK_FALSE(validate(base).ok());
  }
  SUBCASE("truncation is not a full schedule") {
    base.steps.resize(12);
    auto report = validate(base);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].find("step count") != std::string::npos);
  }
  SUBCASE("final grid far from nominal ratio") {
    base.steps.back() = {64, 20};
    CHECK_FALSE(validate(base).ok());
  }
}

TEST_CASE("nominal resolution mismatches are warnings, not violations") {
  // 544x2080 vs a 32x124 final grid (16x would be 512x1984).
  const auto& s = select_schedule(0.26);
  auto report = validate(s);
  CHECK(report.ok());
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("16x") != std::string::npos);

  // The square schedule decodes to exactly 16x its final grid.
  CHECK(validate(select_schedule(1.0)).warnings.empty());
}

TEST_CASE("selection is log-space nearest with clamping") {
  CHECK(select_schedule(1.0).aspect_ratio == doctest::Approx(1.0));
  CHECK(select_schedule(0.26).aspect_ratio == doctest::Approx(0.26));
  // 0.9 sits between 0.882 and 0.937; log distance favors 0.882.
  CHECK(select_schedule(0.9).aspect_ratio == doctest::Approx(0.882));
  // Either side of the log midpoint of 0.250 and 0.260.
  CHECK(select_schedule(0.2549).aspect_ratio == doctest::Approx(0.250));
  CHECK(select_schedule(0.2551).aspect_ratio == doctest::Approx(0.260));
  // Out-of-range clamps to the extremes.
  CHECK(select_schedule(0.01).aspect_ratio == doctest::Approx(0.250));
  CHECK(select_schedule(10.0).aspect_ratio == doctest::Approx(4.0));

  CHECK_THROWS_AS(select_schedule(0.0), std::invalid_argument);
  CHECK_THROWS_AS(select_schedule(-2.0), std::invalid_argument);
  CHECK_THROWS_AS(select_schedule(std::nan("")), std::invalid_argument);
}

TEST_CASE("level truncation and token totals for the square schedule") {
  const auto& full = select_schedule(1.0);
  auto s256 = truncate_for_level(full, 256);
  auto s512 = truncate_for_level(full, 512);
  auto s1024 = truncate_for_level(full, 1024);

  CHECK(s256.steps.size() == 12);
  CHECK(s512.steps.size() == 16);
  CHECK(s1024.steps.size() == 18);
  CHECK(s256.steps.back() == ScaleStep{16, 16});
  CHECK(s512.steps.back() == ScaleStep{32, 32});
  CHECK(s1024.steps.back() == ScaleStep{64, 64});

  CHECK(total_tokens(s256) == 900);
  CHECK(total_tokens(s512) == 3684);
  CHECK(total_tokens(s1024) == 10084);

  CHECK_THROWS_AS(truncate_for_level(full, 768), std::invalid_argument);
  CHECK_THROWS_AS(truncate_for_level(full, 0), std::invalid_argument);
}

TEST_CASE("final grids stay near 4096 tokens across all ratios") {
  long long min_area = 1 << 30;
  long long max_area = 0;
  for (const auto& s : builtin_schedules()) {
    long long a = s.steps.back().area();
    min_area = std::min(min_area, a);
    max_area = std::max(max_area, a);
  }
  CHECK(min_area == 3696);
  CHECK(max_area == 4096);
}

TEST_CASE("cross-schedule spread report") {
  auto report = cross_schedule_report();
  REQUIRE(report.spreads.size() == 17);  // steps 2..18

  // Coarse steps disagree the most (areas 3..6 at step 2); by the
  // final step every ratio lands within the same ~11% band.
  CHECK(report.max_rel_spread == doctest::Approx(1.0));
  CHECK(report.spreads.front().scale == 2);
  CHECK(report.spreads.front().min_area == 3);
  CHECK(report.spreads.front().max_area == 6);

  const auto& last = report.spreads.back();
  CHECK(last.scale == 18);
  CHECK(last.min_area == 3696);
  CHECK(last.max_area == 4096);
  CHECK(last.rel_spread == doctest::Approx(400.0 / 3696.0));

  CHECK(report.spreads[10].scale == 12);
  CHECK(report.spreads[10].rel_spread == doctest::Approx(25.0 / 231.0));
}
