#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stoknap/model.hpp"
#include "stoknap/objective.hpp"
#include "stoknap/polytope.hpp"

namespace stoknap {

// A sampled (item, start slot) pair.
struct Proposal {
  size_t item = 0;
  int t = 1;
};

enum class BlockCause { kNone, kSlotUnavailable, kPartitionUsed, kDuplicateItem };

struct ProposalOutcome {
  Proposal proposal;
  bool real = false;
  BlockCause cause = BlockCause::kNone;
  // processing-order index of the proposal whose presence blocked this
  // one; -1 for real proposals
  int blocker = -1;
  int size = 0;    // drawn in both branches; phantoms block with it too
  int reward = 0;  // 0 for phantoms
};

struct ExecutionTrace {
  std::vector<ProposalOutcome> outcomes;  // in processing order
  // per slot 1..B: processing-order index of the proposal that first
  // marked the slot, or -1 while free (index 0 unused)
  std::vector<int> slot_marker;
  RewardVector rewards;
  double objective = 0.0;
};

// Includes each pair (i, t) with x_{Start(i),t} > 0 independently with
// exactly that probability. The solution is used as-is (it is the
// half-stopping-time greedy output; no extra scaling happens here).
// Throws when any start value exceeds 1 + tolerance.
std::vector<Proposal> sample_proposals(const ConstraintSystem& system,
                                       const FractionalSolution& solution, uint64_t seed);

// Non-decreasing in t; ties permuted uniformly at random. Tie ranks are
// keyed per (item, t) so orderings couple across different proposal sets
// under one seed.
std::vector<Proposal> order_proposals(std::vector<Proposal> proposals, uint64_t seed);

// Runs the pruning pass: a proposal is real iff its slot is free, its
// partition untouched and its item unseen; both real and phantom
// proposals draw a size and mark slots t..t+size-1 unavailable. Earlier
// proposals of a partition block later ones whatever their own fate.
// When pinned_sizes is given (one entry per item, 0 = draw), every
// proposal of an item realizes the pinned size; used by the CRS probes.
ExecutionTrace execute(const std::vector<Proposal>& ordered, const Instance& instance,
                       uint64_t seed, const std::vector<int>* pinned_sizes = nullptr);

// sample -> order -> execute with substreams derived from seed, then
// evaluates the objective on the final reward vector.
ExecutionTrace run_policy_once(const Instance& instance, const ConstraintSystem& system,
                               const FractionalSolution& solution, uint64_t seed);

const char* to_string(BlockCause cause);

}  // namespace stoknap
