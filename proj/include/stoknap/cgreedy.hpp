#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stoknap/model.hpp"
#include "stoknap/objective.hpp"
#include "stoknap/polytope.hpp"

namespace stoknap {

struct GreedyConfig {
  double stopping_time = 0.5;  // b; output lies in b * P
  double step = 0.0;           // delta; 0 selects min(0.05, 1/(2 n^3))
  size_t samples_per_weight = 2000;
  uint64_t seed = 1;
  // evaluate marginal weights exactly via the multilinear enumeration
  // instead of sampling (small instances only)
  bool exact_marginals = false;
  size_t enumeration_guard = 12;

  double effective_step(size_t n_items) const;
  // iteration count b/delta; throws unless integral within tolerance
  size_t iterations(size_t n_items) const;
};

struct GreedyIterationRow {
  size_t iteration = 0;
  double weight_norm = 0.0;        // l2 norm of the clamped weight vector
  double objective_estimate = 0.0; // F-bar at the accumulated point
};

struct GreedyResult {
  FractionalSolution solution;
  std::vector<GreedyIterationRow> trace;
  std::vector<std::string> notices;
  size_t lp_solves = 0;
};

// Stochastic continuous greedy over the relaxation: per iteration,
// estimates the marginal weight of each item at the current inclusion
// probabilities (negative estimates clamped to 0), takes the LP vertex
// for that weight vector and accumulates y += delta * z in the full
// variable space. The output satisfies y / b in P by convexity.
GreedyResult continuous_greedy(const Instance& instance, const ConstraintSystem& system,
                               const GreedyConfig& config);

struct QualityReport {
  double fbar = 0.0;
  double fbar_stderr = 0.0;  // 0 when exact
  bool fbar_exact = false;
  std::optional<double> opt;
  std::optional<double> ratio;  // absent when opt is 0 or unknown
  std::vector<std::string> notices;
};

QualityReport greedy_quality_report(const Instance& instance, const ConstraintSystem& system,
                                    const FractionalSolution& solution,
                                    std::optional<double> opt_value, size_t sample_count,
                                    uint64_t seed, size_t enumeration_guard = 12);

}  // namespace stoknap
