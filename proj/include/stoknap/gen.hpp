#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stoknap/model.hpp"

namespace stoknap {

enum class ObjectiveKind { kAdditive, kConcaveOfSum, kNestedCoverage, kRotate };

struct RandomInstanceParams {
  size_t n_base = 2;
  int budget = 4;
  int reward_bound = 2;
  size_t max_support = 3;  // support points per base item
  ObjectiveKind objective = ObjectiveKind::kRotate;  // kRotate derives from seed
};

struct SpotInstanceParams {
  size_t n_jobs = 2;
  size_t n_instances = 1;
  int budget = 4;       // dollars
  int reward_bound = 2; // max epochs
};

// Deterministic per seed. Objective parameters are shared by all caps of
// one base item, so the exact DP applies to every generated instance.
Instance generate_random_instance(const RandomInstanceParams& params, uint64_t seed);

// Spot-scheduling catalog fed through the reduction; same determinism
// and uniformity guarantees.
Instance generate_spot_instance(const SpotInstanceParams& params, uint64_t seed);

}  // namespace stoknap
