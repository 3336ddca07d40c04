#pragma once

#include <string>
#include <vector>

namespace nextscale::schedule {

// One step of a progressive generation schedule: the token grid is
// h x w at this step.
struct ScaleStep {
  int h = 0;
  int w = 0;

  long long area() const { return static_cast<long long>(h) * w; }
  friend bool operator==(const ScaleStep&, const ScaleStep&) = default;
};

// A coarse-to-fine schedule for one target aspect ratio. Full schedules
// have 18 steps; truncations for lower resolution levels keep a prefix.
struct ScaleSchedule {
  double aspect_ratio = 1.0;   // nominal height:width ratio
  int ratio_h = 1;             // integer ratio label, e.g. 13:19
  int ratio_w = 1;
  int pixels_h = 0;            // nominal output resolution in pixels
  int pixels_w = 0;
  std::vector<ScaleStep> steps;

  std::string label() const;   // e.g. "1.000 (1:1)"
};

inline constexpr int kFullScheduleSteps = 18;

// All built-in schedules, in table order (ascending aspect ratio).
const std::vector<ScaleSchedule>& builtin_schedules();

// Built-in schedule whose aspect ratio is nearest to `ratio` in log
// space. Ties go to the smaller ratio; out-of-range requests clamp to
// the first/last entry. Throws std::invalid_argument unless ratio > 0
// and finite.
const ScaleSchedule& select_schedule(double ratio);

// Prefix of `full` used at a given resolution level. Levels 256, 512
// and 1024 keep the first 12, 16 and 18 steps. Any other level throws
// std::invalid_argument.
ScaleSchedule truncate_for_level(const ScaleSchedule& full, int level);

// Total token count, sum of h*w over all steps.
long long total_tokens(const ScaleSchedule& s);

// Per-schedule validation. `violations` lists hard invariant failures:
// step count != 18, first step != 1x1, a step smaller in area than its
// predecessor, or a final grid aspect more than 25% away from the
// nominal ratio. `warnings` flags a nominal pixel resolution that is
// not 16x the final grid (several built-ins do this by design).
struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};
ValidationReport validate(const ScaleSchedule& s);

// Cross-schedule consistency: at each step index >= 2, how far apart
// are the grid areas across all built-ins? rel_spread = (max-min)/min.
struct ScaleSpread {
  int scale = 0;  // step index, 1-based
  long long min_area = 0;
  long long max_area = 0;
  double rel_spread = 0.0;
};
struct CrossScheduleReport {
  std::vector<ScaleSpread> spreads;
  double max_rel_spread = 0.0;
};
CrossScheduleReport cross_schedule_report();

}  // namespace nextscale::schedule
