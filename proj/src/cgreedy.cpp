#include "stoknap/cgreedy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stoknap/rng.hpp"

namespace stoknap {

double GreedyConfig::effective_step(size_t n_items) const {
  if (step > 0.0) return step;
  const double n3 = static_cast<double>(n_items) * n_items * n_items;
  return std::min(0.05, 1.0 / (2.0 * n3));
}

size_t GreedyConfig::iterations(size_t n_items) const {
  if (stopping_time <= 0.0 || stopping_time > 1.0)
    throw std::invalid_argument("greedy: stopping time must lie in (0, 1]");
  const double delta = effective_step(n_items);
  if (delta <= 0.0) throw std::invalid_argument("greedy: step must be positive");
  const double ratio = stopping_time / delta;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) + 1e-12)
    throw std::invalid_argument("greedy: step must divide the stopping time");
  return static_cast<size_t>(rounded);
}

GreedyResult continuous_greedy(const Instance& instance, const ConstraintSystem& system,
                               const GreedyConfig& config) {
  if (!instance.objective) throw std::invalid_argument("greedy: instance has no objective");
  const size_t n = instance.item_count();
  const size_t iters = config.iterations(n);
  const double delta = config.effective_step(n);
  const ObjectiveFunction& f = *instance.objective;

  GreedyResult result;
  result.solution.values.assign(system.variable_count(), 0.0);
  result.solution.xbar.assign(n, 0.0);
  result.solution.tolerance = 1e-9;

  // singletons should be reachable; a cap never fitting any slot would
  // silently weaken the guarantee, so it is worth a notice
  for (size_t i = 0; i < n; ++i) {
    bool fits_somewhere = false;
    for (int t = 1; t <= system.budget(); ++t) fits_somewhere |= system.start_fits(i, t);
    if (!fits_somewhere)
      result.notices.push_back("singleton infeasible under start-fit: " + instance.items[i].id);
  }

  std::vector<double> weights(n, 0.0);
  for (size_t iter = 0; iter < iters; ++iter) {
    const uint64_t iter_seed = derive_seed(config.seed, iter);
    double base_exact = 0.0;
    if (config.exact_marginals)
      base_exact = multilinear_exact(f, result.solution.xbar, instance, config.enumeration_guard);

    for (size_t i = 0; i < n; ++i) {
      double w;
      if (config.exact_marginals) {
        std::vector<double> forced = result.solution.xbar;
        forced[i] = 1.0;
        w = multilinear_exact(f, forced, instance, config.enumeration_guard) - base_exact;
      } else {
        // one seed per iteration: common random numbers across items
        w = marginal_weight_estimate(f, result.solution.xbar, i, instance,
                                     config.samples_per_weight, iter_seed)
                .mean;
      }
      weights[i] = std::max(0.0, w);
    }

    double norm = 0.0;
    for (double w : weights) norm += w * w;
    norm = std::sqrt(norm);
    if (norm == 0.0)
      result.notices.push_back("all-zero weight vector at iteration " + std::to_string(iter));

    const FractionalSolution vertex = solve_weighted(system, weights);
    ++result.lp_solves;
    for (size_t v = 0; v < result.solution.values.size(); ++v)
      result.solution.values[v] += delta * vertex.values[v];
    for (size_t i = 0; i < n; ++i) result.solution.xbar[i] += delta * vertex.xbar[i];

    GreedyIterationRow row;
    row.iteration = iter;
    row.weight_norm = norm;
    if (config.exact_marginals) {
      row.objective_estimate =
          multilinear_exact(f, result.solution.xbar, instance, config.enumeration_guard);
    } else {
      row.objective_estimate = multilinear_estimate(f, result.solution.xbar, instance,
                                                    config.samples_per_weight,
                                                    derive_seed(iter_seed, 0xF0))
                                   .mean;
    }
    result.trace.push_back(row);
  }
  return result;
}

QualityReport greedy_quality_report(const Instance& instance, const ConstraintSystem& system,
                                    const FractionalSolution& solution,
                                    std::optional<double> opt_value, size_t sample_count,
                                    uint64_t seed, size_t enumeration_guard) {
  (void)system;
  QualityReport report;
  const ObjectiveFunction& f = *instance.objective;
  try {
    report.fbar = multilinear_exact(f, solution.xbar, instance, enumeration_guard);
    report.fbar_exact = true;
  } catch (const std::domain_error&) {
    const Estimate est = multilinear_estimate(f, solution.xbar, instance, sample_count, seed);
    report.fbar = est.mean;
    report.fbar_stderr = est.stderr_mean;
    report.fbar_exact = false;
    report.notices.push_back("F-bar sampled (enumeration guard exceeded)");
  }
  if (opt_value) {
    report.opt = opt_value;
    if (*opt_value > 0.0) {
      report.ratio = report.fbar / *opt_value;
    } else {
      report.notices.push_back("OPT is 0: ratio undefined");
    }
  }
  return report;
}

}  // namespace stoknap
