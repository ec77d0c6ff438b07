#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stoknap/model.hpp"
#include "stoknap/objective.hpp"

namespace stoknap::testing {

// Expanded item with explicit support/rewards; cap defaults to the
// largest support size.
inline ExpandedItem item(std::string id, std::map<int, double> sizes, std::map<int, int> rewards,
                         int cap = 0, std::string partition = "") {
  ExpandedItem out;
  out.id = id;
  out.base_id = id;
  out.cap = cap > 0 ? cap : sizes.rbegin()->first;
  out.sizes.support = std::move(sizes);
  out.rewards.values = std::move(rewards);
  out.partition_id = partition.empty() ? id : partition;
  return out;
}

// Instance from explicit expanded items; partitions from partition_id.
inline Instance instance_of(std::vector<ExpandedItem> items, int budget, int reward_bound,
                            std::shared_ptr<const ObjectiveFunction> objective = nullptr) {
  Instance inst;
  inst.budget = budget;
  inst.reward_bound = reward_bound;
  for (auto& it : items) {
    inst.matroid.partitions[it.partition_id].push_back(it.id);
    inst.items.push_back(std::move(it));
  }
  for (auto& [pid, members] : inst.matroid.partitions) {
    (void)pid;
    std::sort(members.begin(), members.end());
  }
  inst.finalize();
  inst.objective = std::move(objective);
  return inst;
}

inline std::shared_ptr<const ObjectiveFunction> additive_uniform(const Instance& inst,
                                                                 double w = 1.0) {
  std::vector<std::string> ids;
  for (const auto& it : inst.items) ids.push_back(it.id);
  return std::make_shared<ObjectiveFunction>(ObjectiveFunction::additive(
      ids, std::vector<double>(ids.size(), w), inst.reward_bound));
}

}  // namespace stoknap::testing
