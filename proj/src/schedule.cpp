#include "nextscale/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nextscale::schedule {

std::string ScaleSchedule::label() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f (%d:%d)", aspect_ratio, ratio_h, ratio_w);
  return buf;
}

const ScaleSchedule& select_schedule(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("select_schedule: ratio must be positive and finite");
  }
  const auto& all = builtin_schedules();
  double want = std::log(ratio);
  std::size_t best = 0;
  double best_dist = std::abs(std::log(all[0].aspect_ratio) - want);
  for (std::size_t i = 1; i < all.size(); ++i) {
    double d = std::abs(std::log(all[i].aspect_ratio) - want);
    if (d < best_dist) {  // strict: ties keep the earlier (smaller) ratio
      best_dist = d;
      best = i;
    }
  }
  return all[best];
}

ScaleSchedule truncate_for_level(const ScaleSchedule& full, int level) {
  std::size_t keep;
  switch (level) {
    case 256: keep = 12; break;
    case 512: keep = 16; break;
    case 1024: keep = 18; break;
    default:
      throw std::invalid_argument("truncate_for_level: level must be 256, 512 or 1024");
  }
  if (full.steps.size() < keep) {
    throw std::invalid_argument("truncate_for_level: schedule has fewer steps than the level needs");
  }
  ScaleSchedule out = full;
  out.steps.assign(full.steps.begin(), full.steps.begin() + keep);
  return out;
}

long long total_tokens(const ScaleSchedule& s) {
  long long total = 0;
  for (const auto& step : s.steps) total += step.area();
  return total;
}

ValidationReport validate(const ScaleSchedule& s) {
  ValidationReport report;
  char buf[160];

  if (static_cast<int>(s.steps.size()) != kFullScheduleSteps) {
    std::snprintf(buf, sizeof(buf), "step count is %zu, expected %d", s.steps.size(),
                  kFullScheduleSteps);
    report.violations.emplace_back(buf);
  }
  if (s.steps.empty()) return report;

  if (!(s.steps.front() == ScaleStep{1, 1})) {
    std::snprintf(buf, sizeof(buf), "first step is (%d,%d), expected (1,1)",
                  s.steps.front().h, s.steps.front().w);
    report.violations.emplace_back(buf);
  }
  for (std::size_t k = 1; k < s.steps.size(); ++k) {
    if (s.steps[k].area() < s.steps[k - 1].area()) {
      std::snprintf(buf, sizeof(buf), "area shrinks at step %zu: (%d,%d) after (%d,%d)",
                    k + 1, s.steps[k].h, s.steps[k].w, s.steps[k - 1].h, s.steps[k - 1].w);
      report.violations.emplace_back(buf);
    }
  }

  const ScaleStep& last = s.steps.back();
  double final_ratio = static_cast<double>(last.h) / last.w;
  double rel = std::abs(final_ratio - s.aspect_ratio) / s.aspect_ratio;
  if (rel > 0.25) {
    std::snprintf(buf, sizeof(buf),
                  "final grid %dx%d has ratio %.4f, %.1f%% away from nominal %.4f",
                  last.h, last.w, final_ratio, rel * 100.0, s.aspect_ratio);
    report.violations.emplace_back(buf);
  }

  if (s.pixels_h != last.h * 16 || s.pixels_w != last.w * 16) {
    std::snprintf(buf, sizeof(buf),
                  "nominal resolution %dx%d is not 16x the final grid %dx%d",
                  s.pixels_h, s.pixels_w, last.h, last.w);
    report.warnings.emplace_back(buf);
  }
  return report;
}

CrossScheduleReport cross_schedule_report() {
  const auto& all = builtin_schedules();
  CrossScheduleReport report;
  for (int k = 2; k <= kFullScheduleSteps; ++k) {
    ScaleSpread spread;
    spread.scale = k;
    spread.min_area = all[0].steps[k - 1].area();
    spread.max_area = spread.min_area;
    for (const auto& s : all) {
      long long a = s.steps[k - 1].area();
      spread.min_area = std::min(spread.min_area, a);
      spread.max_area = std::max(spread.max_area, a);
    }
    spread.rel_spread =
        static_cast<double>(spread.max_area - spread.min_area) / spread.min_area;
    report.max_rel_spread = std::max(report.max_rel_spread, spread.rel_spread);
    report.spreads.push_back(spread);
  }
  return report;
}

}  // namespace nextscale::schedule
