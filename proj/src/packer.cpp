#include "nextscale/packer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nextscale/rng.hpp"
#include "nextscale/schedule.hpp"

namespace nextscale::pack {

const char* to_string(WorkKind kind) {
  switch (kind) {
    case WorkKind::text: return "text";
    case WorkKind::t2i: return "t2i";
    case WorkKind::interleaved: return "interleaved";
    case WorkKind::edit: return "edit";
  }
  return "unknown";
}

WorkKind work_kind_from_string(const std::string& name) {
  if (name == "text") return WorkKind::text;
  if (name == "t2i") return WorkKind::t2i;
  if (name == "interleaved") return WorkKind::interleaved;
  if (name == "edit") return WorkKind::edit;
  throw std::invalid_argument("work_kind_from_string: unknown kind '" + name + "'");
}

long long cost_of(const WorkItem& item, const cost::CostConfig& cfg) {
  if (item.token_len < 1) throw std::invalid_argument("cost_of: token_len must be >= 1");
  cost::CostConfig one_step = cfg;
  one_step.steps = 1;
  return cost::fixed_sequence_total(item.token_len, one_step);
}

void fill_costs(std::span<WorkItem> items, const cost::CostConfig& cfg) {
  for (auto& item : items) item.cost = cost_of(item, cfg);
}

namespace {

// Shared first-fit-decreasing core; `key` selects the packed quantity.
template <typename KeyFn>
std::vector<PackedBin> first_fit_decreasing(std::span<const WorkItem> items,
                                            long long capacity, KeyFn key) {
  if (capacity < 1) throw std::invalid_argument("packing capacity must be positive");

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    long long ka = key(items[a]);
    long long kb = key(items[b]);
    if (ka != kb) return ka > kb;
    return items[a].id < items[b].id;
  });

  std::vector<PackedBin> bins;
  std::vector<long long> used;  // packed key per bin, parallel to bins
  for (std::size_t idx : order) {
    const WorkItem& item = items[idx];
    long long k = key(item);
    if (k < 0) throw std::invalid_argument("packing key must be non-negative");

    std::size_t target = bins.size();
    if (k > capacity) {
      // Dedicated bin; nothing else can join it.
      bins.push_back({static_cast<int>(bins.size()), {}, 0, 0, 0, true});
      used.push_back(k);
    } else {
      for (std::size_t b = 0; b < bins.size(); ++b) {
        if (!bins[b].oversize && used[b] + k <= capacity) {
          target = b;
          break;
        }
      }
      if (target == bins.size()) {
        bins.push_back({static_cast<int>(bins.size()), {}, 0, 0, 0, false});
        used.push_back(0);
      }
      used[target] += k;
    }

    PackedBin& bin = bins[target];
    bin.items.push_back(item.id);
    bin.total_cost += item.cost;
    bin.total_tokens += item.token_len;
    bin.effective_cost = bin.total_cost;
  }
  return bins;
}

}  // namespace

std::vector<PackedBin> pack_budget(std::span<const WorkItem> items, long long budget) {
  return first_fit_decreasing(items, budget, [](const WorkItem& i) { return i.cost; });
}

std::vector<PackedBin> pack_fixed_length(std::span<const WorkItem> items,
                                         long long max_tokens) {
  return first_fit_decreasing(items, max_tokens,
                              [](const WorkItem& i) { return i.token_len; });
}

std::vector<PackedBin> pack_padding(std::span<const WorkItem> items, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("pack_padding: batch_size must be >= 1");
  std::vector<PackedBin> bins;
  for (std::size_t start = 0; start < items.size(); start += batch_size) {
    PackedBin bin;
    bin.worker = static_cast<int>(bins.size());
    long long max_cost = 0;
    std::size_t end = std::min(items.size(), start + batch_size);
    for (std::size_t i = start; i < end; ++i) {
      bin.items.push_back(items[i].id);
      bin.total_cost += items[i].cost;
      bin.total_tokens += items[i].token_len;
      max_cost = std::max(max_cost, items[i].cost);
    }
    bin.effective_cost = static_cast<long long>(batch_size) * max_cost;
    bins.push_back(std::move(bin));
  }
  return bins;
}

ImbalanceReport imbalance_report(std::span<const PackedBin> bins) {
  if (bins.empty()) throw std::invalid_argument("imbalance_report: no bins");

  ImbalanceReport report;
  report.max_cost = bins[0].effective_cost;
  report.min_cost = bins[0].effective_cost;
  long long useful = 0;
  long long effective = 0;
  for (const auto& bin : bins) {
    report.max_cost = std::max(report.max_cost, bin.effective_cost);
    report.min_cost = std::min(report.min_cost, bin.effective_cost);
    useful += bin.total_cost;
    effective += bin.effective_cost;
  }
  report.mean_cost = static_cast<double>(effective) / static_cast<double>(bins.size());
  if (report.mean_cost > 0.0) {
    report.imbalance = static_cast<double>(report.max_cost) / report.mean_cost - 1.0;
  }
  double ceiling = static_cast<double>(bins.size()) * static_cast<double>(report.max_cost);
  if (ceiling > 0.0) {
    report.idle_fraction = 1.0 - static_cast<double>(useful) / ceiling;
  }
  if (effective > 0) {
    report.padding_waste = 1.0 - static_cast<double>(useful) / static_cast<double>(effective);
  }
  return report;
}

std::vector<WorkItem> synth_workload(std::size_t count, const MixSpec& mix,
                                     std::uint64_t seed) {
  double total = mix.text + mix.t2i + mix.interleaved + mix.edit;
  if (!(total > 0.0)) throw std::invalid_argument("synth_workload: mixture weights sum to zero");
  const double weights[4] = {mix.text, mix.t2i, mix.interleaved, mix.edit};

  Rng rng(seed);
  const auto& schedules = schedule::builtin_schedules();
  const int levels[3] = {256, 512, 1024};

  // Total visual tokens of a random schedule at a random level.
  auto image_tokens = [&]() {
    const auto& s = schedules[rng.next_below(schedules.size())];
    int level = levels[rng.next_below(3)];
    return schedule::total_tokens(schedule::truncate_for_level(s, level));
  };
  // Log-normal text length, median near `median`, clamped to >= 1.
  auto text_tokens = [&](double median, double sigma) {
    double n = std::exp(std::log(median) + sigma * rng.next_gaussian());
    return std::max(1ll, static_cast<long long>(std::llround(n)));
  };

  std::vector<WorkItem> items;
  items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto kind = static_cast<WorkKind>(
        rng.next_weighted(std::span<const double>(weights, 4)));
    WorkItem item;
    item.id = static_cast<std::int64_t>(i);
    item.kind = kind;
    switch (kind) {
      case WorkKind::text:
        item.token_len = text_tokens(400.0, 1.0);
        break;
      case WorkKind::t2i:
        item.token_len = text_tokens(60.0, 0.5) + image_tokens();
        break;
      case WorkKind::interleaved: {
        long long n = text_tokens(300.0, 0.7);
        std::uint64_t images = 1 + rng.next_below(3);
        for (std::uint64_t im = 0; im < images; ++im) n += image_tokens();
        item.token_len = n;
        break;
      }
      case WorkKind::edit:
        // Source and target images around one instruction.
        item.token_len = text_tokens(40.0, 0.5) + image_tokens() + image_tokens();
        break;
    }
    items.push_back(item);
  }
  return items;
}

}  // namespace nextscale::pack
