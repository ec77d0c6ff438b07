#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stoknap/model.hpp"

namespace stoknap {

// Realized rewards per item, 0 for excluded items; dense instance order.
using RewardVector = std::vector<int>;

// Monotone lattice-submodular objective over reward vectors in [0..M]^n.
// Three built-in families:
//   Additive        f(r) = sum_i w_i r_i
//   ConcaveOfSum    f(r) = g(sum_i w_i r_i), g concave piecewise linear
//   NestedCoverage  f(r) = weight(union_i A_i(r_i)) for nested level sets
// Instances are immutable; build via the static factories.
class ObjectiveFunction {
 public:
  enum class Family { kAdditive, kConcaveOfSum, kNestedCoverage };

  static ObjectiveFunction additive(std::vector<std::string> item_ids, std::vector<double> weights,
                                    int reward_bound);
  // g given by breakpoints (x, g(x)) with x ascending starting at 0, plus
  // the slope beyond the last breakpoint.
  static ObjectiveFunction concave_of_sum(std::vector<std::string> item_ids,
                                          std::vector<double> weights,
                                          std::vector<std::pair<double, double>> breakpoints,
                                          double final_slope, int reward_bound);
  // Element e is covered by item i at reward r iff r >= thresholds[i][e];
  // thresholds of reward_bound+1 mean never covered by that item.
  static ObjectiveFunction nested_coverage(std::vector<std::string> item_ids,
                                           std::vector<double> element_weights,
                                           std::vector<std::vector<int>> thresholds,
                                           int reward_bound);

  double evaluate(const RewardVector& r) const;

  Family family() const { return family_; }
  size_t arity() const { return item_ids_.size(); }
  int reward_bound() const { return reward_bound_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::pair<double, double>>& breakpoints() const { return breakpoints_; }
  double final_slope() const { return final_slope_; }
  const std::vector<double>& element_weights() const { return element_weights_; }
  const std::vector<std::vector<int>>& thresholds() const { return thresholds_; }

  // True when every item of one partition shares identical parameters, so
  // the value depends only on (base item, reward). The exact DP relies on
  // this to keep its state space small.
  bool uniform_across_partitions(const Instance& instance) const;

 private:
  ObjectiveFunction() = default;

  double g_value(double x) const;

  Family family_ = Family::kAdditive;
  std::vector<std::string> item_ids_;
  int reward_bound_ = 0;
  std::vector<double> weights_;
  std::vector<std::pair<double, double>> breakpoints_;
  double final_slope_ = 0.0;
  std::vector<double> element_weights_;
  std::vector<std::vector<int>> thresholds_;
};

// f-bar(S): exact expectation of f over the product of per-item reward
// distributions, items outside S pinned to 0. Throws when more than
// `guard` items of S have a nontrivial reward distribution.
double lifted_value(const ObjectiveFunction& f, const std::vector<size_t>& selected,
                    const Instance& instance, size_t guard = 12);

// Exact multilinear extension F-bar(xbar) by product enumeration over the
// per-item mixture laws. Throws when more than `guard` items carry a
// nontrivial mixture.
double multilinear_exact(const ObjectiveFunction& f, const std::vector<double>& xbar,
                         const Instance& instance, size_t guard = 12);

struct Estimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  size_t samples = 0;
};

// Unbiased sampler for F-bar(xbar); deterministic for a fixed seed.
Estimate multilinear_estimate(const ObjectiveFunction& f, const std::vector<double>& xbar,
                              const Instance& instance, size_t num_samples, uint64_t seed);

// Estimates F-bar(xbar or 1_i) - F-bar(xbar) by paired sampling: each
// world is evaluated with and without item i forced in, sharing all other
// randomness. Calls with the same seed share worlds across items.
Estimate marginal_weight_estimate(const ObjectiveFunction& f, const std::vector<double>& xbar,
                                  size_t item, const Instance& instance, size_t num_samples,
                                  uint64_t seed);

struct LatticePairViolation {
  RewardVector u, v;
  std::string kind;  // "monotone" or "lattice-submodular"
  double slack = 0.0;
};

struct LatticeCheckReport {
  size_t pairs_checked = 0;
  bool exhaustive = false;
  std::vector<LatticePairViolation> violations;
};

// Checks monotonicity and lattice-submodularity of f over [0..M]^n,
// exhaustively when (M+1)^(2n) fits in pair_guard, else on seeded random
// pairs. Stops collecting after max_violations entries.
LatticeCheckReport check_monotone_lattice_submodular(const ObjectiveFunction& f, size_t n, int M,
                                                     size_t pair_guard = 1000000,
                                                     uint64_t seed = 1,
                                                     size_t max_violations = 32);

}  // namespace stoknap
