#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stoknap/cgreedy.hpp"
#include "stoknap/model.hpp"
#include "stoknap/verify.hpp"

namespace stoknap {

// Shared configuration for the property suites driven by both the CLI
// verify command and the acceptance harness.
struct SuiteConfig {
  uint64_t seed = 1;
  unsigned threads = 1;
  size_t crs_runs = 200000;
  double track_threshold = 0.01;
  size_t min_events = 300;
  size_t favg_runs = 100000;
  size_t mono_pairs = 5;
  size_t mono_trials = 100000;
  size_t estimator_reps = 100;
  size_t estimator_samples = 100000;
  size_t lp_probes = 5;
  size_t dp_guard = 10000000;
  GreedyConfig greedy;
};

struct SuiteResult {
  std::vector<ReportRow> rows;
  TraceAudit audit;          // populated by the simulation-heavy suites
  size_t flags = 0;          // report-only flags (never gate the verdict)

  bool all_passed() const {
    for (const auto& row : rows)
      if (!row.pass) return false;
    return true;
  }
};

// Lemma "1/2-CRS": conditional drop rate of every tracked pair stays
// below 1/2 + 3 sigma on the greedy output. A precomputed greedy result
// may be passed to share one solve across suites.
SuiteResult suite_crs(const Instance& instance, const std::string& instance_id,
                      const SuiteConfig& config, const GreedyResult* precomputed = nullptr);

// Monotone CRS: closed-form survival ordered exactly, Monte-Carlo
// survival ordered within noise, and closed form vs Monte-Carlo agree.
// The paired probes share one seed, so the ordering check is a coupled
// comparison rather than two independent estimates.
SuiteResult suite_monotonicity(const Instance& instance, const std::string& instance_id,
                               const SuiteConfig& config,
                               const GreedyResult* precomputed = nullptr);

// Relaxation identities on weighted solves + feasibility of the doubled
// greedy output.
SuiteResult suite_polytope(const Instance& instance, const std::string& instance_id,
                           const SuiteConfig& config);

// Sampled multilinear estimator covers the exact value at 3 sigma.
SuiteResult suite_multilinear(const Instance& instance, const std::string& instance_id,
                              const SuiteConfig& config);

// Full pipeline against the adaptive optimum and the F-bar/2 theorem.
SuiteResult suite_dp_ratio(const Instance& instance, const std::string& instance_id,
                           const SuiteConfig& config);

}  // namespace stoknap
