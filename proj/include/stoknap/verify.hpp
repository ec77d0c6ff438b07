#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stoknap/cgreedy.hpp"
#include "stoknap/model.hpp"
#include "stoknap/objective.hpp"
#include "stoknap/polytope.hpp"
#include "stoknap/rounding.hpp"

namespace stoknap {

// ---- exact adaptive optimum ------------------------------------------------

struct DpAction {
  bool stop = true;
  size_t item = 0;  // capped item started when !stop
};

struct DpResult {
  double value = 0.0;
  // action per encoded state (status code * (B+1) + elapsed); stop = -1,
  // else the dense item index started
  std::vector<int> action;
  size_t states = 0;
};

// Exact optimal adaptive policy by dynamic programming over
// (per-partition status, elapsed slots). Statuses record only the
// realized reward, so the objective must be uniform across each
// partition's members; throws otherwise, or when the state space
// exceeds the guard.
DpResult optimal_adaptive_dp(const Instance& instance, size_t state_guard = 10000000);

// ---- Monte-Carlo suites ----------------------------------------------------

// Execution-feasibility tallies across simulation runs.
struct TraceAudit {
  size_t runs = 0;
  size_t matroid_violations = 0;  // > 1 real proposal in one partition
  size_t overlap_violations = 0;  // intersecting real spans or span past B
  size_t budget_violations = 0;   // total real size above B

  size_t total() const { return matroid_violations + overlap_violations + budget_violations; }
  void merge(const TraceAudit& other);
};

void audit_trace(const Instance& instance, const ExecutionTrace& trace, TraceAudit& audit);

// Mean objective of the rounded policy over `runs` seeded executions.
Estimate simulate_favg(const Instance& instance, const ConstraintSystem& system,
                       const FractionalSolution& solution, size_t runs, uint64_t seed,
                       unsigned threads = 1, TraceAudit* audit = nullptr);

struct PairDropStat {
  size_t item = 0;
  int t = 1;
  double x_start = 0.0;
  size_t sampled = 0;
  size_t dropped = 0;
  bool low_power = false;  // fewer conditioning events than requested

  double rate() const { return sampled ? static_cast<double>(dropped) / sampled : 0.0; }
  double stderr_rate() const;
};

// Conditional drop rate per tracked pair (i, t): Pr[phantom | sampled].
// Pairs with start probability below track_threshold are skipped.
std::vector<PairDropStat> crs_drop_rate(const Instance& instance, const ConstraintSystem& system,
                                        const FractionalSolution& solution, size_t runs,
                                        uint64_t seed, double track_threshold = 0.01,
                                        size_t min_events = 300, unsigned threads = 1,
                                        TraceAudit* audit = nullptr);

struct BlockerRow {
  size_t blocker = 0;  // item index of the attributed first blocking cause
  bool same_partition = false;
  size_t events = 0;  // drops of the probed pair attributed to this item
  double rate = 0.0;
  double stderr_rate = 0.0;
  double bound = 0.0;           // per-case bound computed from the solution
  double mid_mass = 0.0;        // transient mass of the blocker at slot t
  double completed_mass = 0.0;  // terminal mass materialized from starts
  double start_at_t = 0.0;
};

struct DropDecomposition {
  size_t item = 0;
  int t = 1;
  size_t sampled = 0;
  std::vector<BlockerRow> blockers;
};

// Splits the drop rate of pair (i, t) by the first blocking cause in the
// trace and compares each share against its case bound.
DropDecomposition drop_bound_decomposition(const Instance& instance,
                                           const ConstraintSystem& system,
                                           const FractionalSolution& solution, size_t item, int t,
                                           size_t runs, uint64_t seed, unsigned threads = 1);

// ---- closed-form survival --------------------------------------------------

// Product-form probability that item i's first sampled copy survives the
// pruning when every other item's size is pinned by `profile`
// (profile[j] >= 1 wherever item j carries start mass; profile[i] is
// ignored). Exact under the pairwise-independent sampling.
double survival_closed_form(const ConstraintSystem& system, const FractionalSolution& solution,
                            const std::vector<int>& profile, size_t item);

// Monte-Carlo counterpart of survival_closed_form on the real pipeline
// with pinned sizes; estimates Pr[first copy of i sampled and kept].
Estimate survival_probe_mc(const Instance& instance, const ConstraintSystem& system,
                           const FractionalSolution& solution, const std::vector<int>& profile,
                           size_t item, size_t trials, uint64_t seed, unsigned threads = 1);

// ---- end-to-end ------------------------------------------------------------

struct EndToEndReport {
  double favg = 0.0;
  double favg_stderr = 0.0;
  double fbar = 0.0;
  double fbar_stderr = 0.0;
  bool fbar_exact = false;
  std::optional<double> opt;
  std::optional<double> ratio;        // favg / opt when defined
  std::optional<double> half_margin;  // favg - fbar/2
  GreedyResult greedy;
};

// Full pipeline: build system, continuous greedy, simulate the rounding,
// divide by the exact adaptive optimum.
EndToEndReport end_to_end_ratio(const Instance& instance, const GreedyConfig& config, size_t runs,
                                uint64_t seed, size_t dp_guard = 10000000, unsigned threads = 1);

// ---- reporting -------------------------------------------------------------

struct ReportRow {
  std::string property;
  std::string instance_id;
  double estimate = 0.0;
  double stderr_est = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace stoknap
