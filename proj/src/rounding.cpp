#include "stoknap/rounding.hpp"

#include <algorithm>
#include <stdexcept>

#include "stoknap/rng.hpp"

namespace stoknap {

namespace {

constexpr uint64_t kSampleStage = 1;
constexpr uint64_t kOrderStage = 2;
constexpr uint64_t kExecStage = 3;

int draw_size(const ExpandedItem& item, Rng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  int last = 1;
  for (const auto& [s, p] : item.sizes.support) {
    acc += p;
    last = s;
    if (u < acc) return s;
  }
  return last;
}

}  // namespace

std::vector<Proposal> sample_proposals(const ConstraintSystem& system,
                                       const FractionalSolution& solution, uint64_t seed) {
  std::vector<Proposal> out;
  for (size_t i = 0; i < system.item_count(); ++i) {
    const size_t u = system.start_node(i);
    for (int t = 1; t <= system.budget(); ++t) {
      const double x = solution.values[system.var_x(u, t)];
      if (x > 1.0 + solution.tolerance)
        throw std::invalid_argument("sample_proposals: start probability above 1 at " +
                                    system.variable_name(system.var_x(u, t)));
      if (x <= 0.0) continue;
      Rng rng(derive_seed(seed, i, static_cast<uint64_t>(t)));
      if (rng.next_double() < x) out.push_back({i, t});
    }
  }
  return out;
}

std::vector<Proposal> order_proposals(std::vector<Proposal> proposals, uint64_t seed) {
  std::vector<std::pair<uint64_t, size_t>> keys(proposals.size());
  for (size_t k = 0; k < proposals.size(); ++k) {
    Rng rng(derive_seed(seed, proposals[k].item, static_cast<uint64_t>(proposals[k].t)));
    keys[k] = {rng.next_u64(), k};
  }
  std::vector<size_t> order(proposals.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (proposals[a].t != proposals[b].t) return proposals[a].t < proposals[b].t;
    if (keys[a].first != keys[b].first) return keys[a].first < keys[b].first;
    return proposals[a].item < proposals[b].item;
  });
  std::vector<Proposal> sorted;
  sorted.reserve(proposals.size());
  for (size_t k : order) sorted.push_back(proposals[k]);
  return sorted;
}

ExecutionTrace execute(const std::vector<Proposal>& ordered, const Instance& instance,
                       uint64_t seed, const std::vector<int>* pinned_sizes) {
  const int B = instance.budget;
  ExecutionTrace trace;
  trace.slot_marker.assign(B + 1, -1);
  trace.rewards.assign(instance.item_count(), 0);
  trace.outcomes.reserve(ordered.size());

  std::vector<int> partition_first(instance.partition_count(), -1);
  std::vector<int> item_first(instance.item_count(), -1);

  for (const Proposal& prop : ordered) {
    const ExpandedItem& item = instance.items[prop.item];
    ProposalOutcome outcome;
    outcome.proposal = prop;

    if (pinned_sizes && (*pinned_sizes)[prop.item] > 0) {
      outcome.size = (*pinned_sizes)[prop.item];
    } else {
      Rng rng(derive_seed(seed, prop.item, static_cast<uint64_t>(prop.t)));
      outcome.size = draw_size(item, rng);
    }

    const size_t part = instance.partition_of(prop.item);
    if (prop.t <= B && trace.slot_marker[prop.t] >= 0) {
      outcome.cause = BlockCause::kSlotUnavailable;
      outcome.blocker = trace.slot_marker[prop.t];
    } else if (partition_first[part] >= 0) {
      outcome.cause = BlockCause::kPartitionUsed;
      outcome.blocker = partition_first[part];
    } else if (item_first[prop.item] >= 0) {
      outcome.cause = BlockCause::kDuplicateItem;
      outcome.blocker = item_first[prop.item];
    } else {
      outcome.real = true;
      outcome.reward = item.rewards.reward_at(outcome.size);
      trace.rewards[prop.item] = outcome.reward;
    }

    const int idx = static_cast<int>(trace.outcomes.size());
    for (int slot = prop.t; slot <= std::min(B, prop.t + outcome.size - 1); ++slot) {
      if (trace.slot_marker[slot] < 0) trace.slot_marker[slot] = idx;
    }
    if (partition_first[part] < 0) partition_first[part] = idx;
    if (item_first[prop.item] < 0) item_first[prop.item] = idx;

    trace.outcomes.push_back(outcome);
  }
  return trace;
}

ExecutionTrace run_policy_once(const Instance& instance, const ConstraintSystem& system,
                               const FractionalSolution& solution, uint64_t seed) {
  auto proposals = sample_proposals(system, solution, derive_seed(seed, kSampleStage));
  auto ordered = order_proposals(std::move(proposals), derive_seed(seed, kOrderStage));
  ExecutionTrace trace = execute(ordered, instance, derive_seed(seed, kExecStage));
  trace.objective = instance.objective->evaluate(trace.rewards);
  return trace;
}

const char* to_string(BlockCause cause) {
  switch (cause) {
    case BlockCause::kNone: return "none";
    case BlockCause::kSlotUnavailable: return "slot_unavailable";
    case BlockCause::kPartitionUsed: return "partition_used";
    case BlockCause::kDuplicateItem: return "duplicate_item";
  }
  return "?";
}

}  // namespace stoknap
