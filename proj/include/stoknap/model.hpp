#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace stoknap {

class ObjectiveFunction;

// Distribution of an item's integral size (time-slot units).
// Support entries map size >= 1 to probability in (0, 1]; probabilities
// sum to 1 within kMassTolerance.
struct SizeDistribution {
  std::map<int, double> support;

  static constexpr double kMassTolerance = 1e-12;

  double total_mass() const;
  int max_size() const;  // 0 when empty
  double prob(int size) const;
  // Pr[size >= s]
  double tail(int s) const;
  // Pr[size <= s]
  double cdf(int s) const;
};

// Non-decreasing reward curve. Values are recorded at specific sizes;
// reward_at() extends the curve as a right-continuous step function
// (reward of the largest recorded size <= s, 0 below the first record),
// matching a non-decreasing R: N -> [M] recorded on a sparse grid.
struct RewardCurve {
  std::map<int, int> values;

  int reward_at(int size) const;
};

struct BaseItem {
  std::string id;
  SizeDistribution sizes;
  RewardCurve rewards;
};

// Item (i, b): base item i with its size distribution truncated at cap b.
struct ExpandedItem {
  std::string id;
  std::string base_id;
  int cap = 1;
  SizeDistribution sizes;    // support within [1, cap]
  RewardCurve rewards;       // restricted to the capped support
  std::string partition_id;  // all caps of one base item share a partition
};

// At most one item per partition may be selected.
struct PartitionMatroid {
  // partition id -> item ids, both in deterministic (sorted) order
  std::map<std::string, std::vector<std::string>> partitions;
};

struct Instance {
  std::vector<ExpandedItem> items;  // sorted by id; index = dense internal id
  PartitionMatroid matroid;
  int budget = 1;        // B, time slots
  int reward_bound = 1;  // M
  std::shared_ptr<const ObjectiveFunction> objective;

  size_t item_count() const { return items.size(); }
  // Dense index of an item id; throws std::invalid_argument when unknown.
  size_t item_index(const std::string& id) const;
  // Dense partition index of item `item_idx` (partitions sorted by id).
  size_t partition_of(size_t item_idx) const;
  size_t partition_count() const { return partition_index_.empty() ? 0 : num_partitions_; }

  // Called after items/matroid are filled to build the lookup tables.
  void finalize();

 private:
  std::map<std::string, size_t> index_;
  std::vector<size_t> partition_index_;  // item idx -> partition idx
  size_t num_partitions_ = 0;
};

struct Violation {
  std::string subject;  // item/field the violation names
  std::string message;
};

// One job/instance pair of the spot-scheduling catalog: the progress
// curve of job j on instance i, in dollars spent.
struct SpotJobProfile {
  std::string job_id;
  std::map<int, int> progress;  // dollars -> epochs completed
};

struct SpotInstance {
  std::string instance_id;
  SizeDistribution cost_until_interruption;  // dollars until interrupt
  std::vector<SpotJobProfile> jobs;          // one per job, same order across instances
};

// Truncates the size distribution at cap b: mass of sizes >= b piles onto
// exactly b; the reward curve is restricted to [1, b].
ExpandedItem apply_size_cap(const BaseItem& item, int b);

// Builds the capped instance: for every base item and every cap in
// {1..B}, one expanded item; caps of one base item share a partition.
Instance expand_with_caps(std::vector<BaseItem> base_items, int budget, int reward_bound,
                          std::shared_ptr<const ObjectiveFunction> objective);

// Appendix-style spot-scheduling reduction: one item per
// (job, instance, cap) triple, one partition per spot instance.
Instance spot_reduce(const std::vector<SpotInstance>& instances, int budget, int reward_bound,
                     std::shared_ptr<const ObjectiveFunction> objective);

// Distribution of the realized reward R(size), size ~ item.sizes.
std::map<int, double> reward_distribution(const ExpandedItem& item);

std::vector<Violation> validate_instance(const Instance& instance);

}  // namespace stoknap
