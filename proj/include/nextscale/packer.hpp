#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nextscale/costmodel.hpp"

namespace nextscale::pack {

enum class WorkKind { text, t2i, interleaved, edit };

const char* to_string(WorkKind kind);
WorkKind work_kind_from_string(const std::string& name);  // std::invalid_argument on unknown

// One training sequence to be placed on a worker. cost is 0 until
// fill_costs computes it; the packing strategies that key on cost
// expect it to be filled.
struct WorkItem {
  std::int64_t id = 0;
  WorkKind kind = WorkKind::text;
  long long token_len = 0;
  long long cost = 0;
};

// Training-style cost of a sequence of length n attending causally to
// itself: layers * (12*n*hidden^2 + 4*n^2*hidden). Exact integer
// arithmetic, std::overflow_error past 64 bits.
long long cost_of(const WorkItem& item, const cost::CostConfig& cfg);
void fill_costs(std::span<WorkItem> items, const cost::CostConfig& cfg);

// One worker's assignment. total_cost is the useful work (sum of
// member costs); effective_cost is the wall-clock-equivalent occupancy,
// equal to total_cost except under padding, where reserved batch slots
// and intra-batch padding inflate it.
struct PackedBin {
  int worker = 0;
  std::vector<std::int64_t> items;
  long long total_cost = 0;
  long long total_tokens = 0;
  long long effective_cost = 0;
  bool oversize = false;  // single item exceeding the bin capacity
};

// First-fit-decreasing by cost: items sorted by descending cost (ties
// by ascending id) each go into the first bin still holding them
// within budget; an item whose cost alone exceeds the budget gets a
// dedicated bin flagged oversize. budget must be positive.
std::vector<PackedBin> pack_budget(std::span<const WorkItem> items, long long budget);

// The same first-fit-decreasing procedure keyed on token_len with
// capacity max_tokens.
std::vector<PackedBin> pack_fixed_length(std::span<const WorkItem> items,
                                         long long max_tokens);

// Naive baseline: consecutive input-order groups of batch_size items;
// every bin reserves batch_size slots at the cost of its longest
// member, so effective_cost = batch_size * max member cost even for a
// short final batch.
std::vector<PackedBin> pack_padding(std::span<const WorkItem> items, int batch_size);

// Aggregate balance metrics over one strategy's bins, occupancy-based.
// idle_fraction is the synchronized-workers view (everyone waits for
// the slowest bin); padding_waste is the share of occupied capacity
// that is padding rather than useful work, zero for strategies that
// pad nothing.
struct ImbalanceReport {
  long long max_cost = 0;   // effective
  long long min_cost = 0;   // effective
  double mean_cost = 0.0;   // effective
  double imbalance = 0.0;   // max/mean - 1
  double idle_fraction = 0.0;   // 1 - sum useful / (bin_count * max)
  double padding_waste = 0.0;   // 1 - sum useful / sum effective
};
ImbalanceReport imbalance_report(std::span<const PackedBin> bins);

// Synthetic mixture of work kinds. Proportions are normalized; kinds
// with weight 0 do not appear.
struct MixSpec {
  double text = 0.0;
  double t2i = 0.0;
  double interleaved = 0.0;
  double edit = 0.0;
};

// Deterministic workload: text lengths are log-normal, image-bearing
// kinds combine a short prompt with token totals of randomly chosen
// built-in schedules at a random resolution level.
std::vector<WorkItem> synth_workload(std::size_t count, const MixSpec& mix,
                                     std::uint64_t seed);

}  // namespace nextscale::pack
