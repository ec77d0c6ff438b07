#include "stoknap/objective.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "stoknap/rng.hpp"
#include "stoknap/stats.hpp"

namespace stoknap {

ObjectiveFunction ObjectiveFunction::additive(std::vector<std::string> item_ids,
                                              std::vector<double> weights, int reward_bound) {
  if (item_ids.size() != weights.size())
    throw std::invalid_argument("additive: weight count mismatch");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("additive: negative weight");
  ObjectiveFunction f;
  f.family_ = Family::kAdditive;
  f.item_ids_ = std::move(item_ids);
  f.weights_ = std::move(weights);
  f.reward_bound_ = reward_bound;
  return f;
}

ObjectiveFunction ObjectiveFunction::concave_of_sum(
    std::vector<std::string> item_ids, std::vector<double> weights,
    std::vector<std::pair<double, double>> breakpoints, double final_slope, int reward_bound) {
  if (item_ids.size() != weights.size())
    throw std::invalid_argument("concave_of_sum: weight count mismatch");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("concave_of_sum: negative weight");
  if (breakpoints.empty() || breakpoints.front().first != 0.0)
    throw std::invalid_argument("concave_of_sum: breakpoints must start at x=0");
  for (size_t j = 1; j < breakpoints.size(); ++j) {
    if (breakpoints[j].first <= breakpoints[j - 1].first)
      throw std::invalid_argument("concave_of_sum: breakpoint x must be ascending");
  }
  ObjectiveFunction f;
  f.family_ = Family::kConcaveOfSum;
  f.item_ids_ = std::move(item_ids);
  f.weights_ = std::move(weights);
  f.breakpoints_ = std::move(breakpoints);
  f.final_slope_ = final_slope;
  f.reward_bound_ = reward_bound;
  return f;
}

ObjectiveFunction ObjectiveFunction::nested_coverage(std::vector<std::string> item_ids,
                                                     std::vector<double> element_weights,
                                                     std::vector<std::vector<int>> thresholds,
                                                     int reward_bound) {
  if (item_ids.size() != thresholds.size())
    throw std::invalid_argument("nested_coverage: one threshold row per item required");
  for (const auto& row : thresholds)
    if (row.size() != element_weights.size())
      throw std::invalid_argument("nested_coverage: threshold row size mismatch");
  for (double w : element_weights)
    if (w < 0.0) throw std::invalid_argument("nested_coverage: negative element weight");
  ObjectiveFunction f;
  f.family_ = Family::kNestedCoverage;
  f.item_ids_ = std::move(item_ids);
  f.element_weights_ = std::move(element_weights);
  f.thresholds_ = std::move(thresholds);
  f.reward_bound_ = reward_bound;
  return f;
}

double ObjectiveFunction::g_value(double x) const {
  const auto& bp = breakpoints_;
  if (x <= bp.front().first) return bp.front().second;
  for (size_t j = 1; j < bp.size(); ++j) {
    if (x <= bp[j].first) {
      const double t = (x - bp[j - 1].first) / (bp[j].first - bp[j - 1].first);
      return bp[j - 1].second + t * (bp[j].second - bp[j - 1].second);
    }
  }
  return bp.back().second + final_slope_ * (x - bp.back().first);
}

double ObjectiveFunction::evaluate(const RewardVector& r) const {
  if (r.size() != item_ids_.size())
    throw std::domain_error("reward vector length mismatch");
  for (int v : r) {
    if (v < 0 || v > reward_bound_)
      throw std::domain_error("reward component outside [0, M]");
  }
  switch (family_) {
    case Family::kAdditive: {
      double sum = 0.0;
      for (size_t i = 0; i < r.size(); ++i) sum += weights_[i] * r[i];
      return sum;
    }
    case Family::kConcaveOfSum: {
      double sum = 0.0;
      for (size_t i = 0; i < r.size(); ++i) sum += weights_[i] * r[i];
      return g_value(sum);
    }
    case Family::kNestedCoverage: {
      double total = 0.0;
      for (size_t e = 0; e < element_weights_.size(); ++e) {
        for (size_t i = 0; i < r.size(); ++i) {
          if (r[i] >= thresholds_[i][e]) {
            total += element_weights_[e];
            break;
          }
        }
      }
      return total;
    }
  }
  return 0.0;
}

bool ObjectiveFunction::uniform_across_partitions(const Instance& instance) const {
  if (item_ids_.size() != instance.item_count()) return false;
  for (size_t i = 0; i < instance.item_count(); ++i) {
    for (size_t j = i + 1; j < instance.item_count(); ++j) {
      if (instance.partition_of(i) != instance.partition_of(j)) continue;
      switch (family_) {
        case Family::kAdditive:
        case Family::kConcaveOfSum:
          if (weights_[i] != weights_[j]) return false;
          break;
        case Family::kNestedCoverage:
          if (thresholds_[i] != thresholds_[j]) return false;
          break;
      }
    }
  }
  return true;
}

namespace {

struct ItemLaw {
  size_t item = 0;
  std::vector<std::pair<int, double>> outcomes;  // (reward, probability)
};

// Product enumeration of E[f(r)] over independent per-item laws; items not
// listed keep reward 0.
double enumerate_expectation(const ObjectiveFunction& f, size_t n,
                             const std::vector<ItemLaw>& laws) {
  RewardVector r(n, 0);
  double total = 0.0;
  // iterative odometer over outcome indices
  std::vector<size_t> pos(laws.size(), 0);
  while (true) {
    double prob = 1.0;
    for (size_t k = 0; k < laws.size(); ++k) {
      const auto& [reward, p] = laws[k].outcomes[pos[k]];
      r[laws[k].item] = reward;
      prob *= p;
    }
    if (prob > 0.0) total += prob * f.evaluate(r);
    size_t k = 0;
    while (k < laws.size() && ++pos[k] == laws[k].outcomes.size()) {
      pos[k] = 0;
      ++k;
    }
    if (k == laws.size()) break;
  }
  return total;
}

size_t nontrivial_count(const std::vector<ItemLaw>& laws) {
  size_t c = 0;
  for (const auto& law : laws)
    if (law.outcomes.size() > 1) ++c;
  return c;
}

}  // namespace

double lifted_value(const ObjectiveFunction& f, const std::vector<size_t>& selected,
                    const Instance& instance, size_t guard) {
  std::vector<ItemLaw> laws;
  laws.reserve(selected.size());
  for (size_t idx : selected) {
    ItemLaw law;
    law.item = idx;
    for (const auto& [reward, p] : reward_distribution(instance.items.at(idx)))
      law.outcomes.emplace_back(reward, p);
    laws.push_back(std::move(law));
  }
  if (nontrivial_count(laws) > guard)
    throw std::domain_error("lifted_value: enumeration guard exceeded");
  return enumerate_expectation(f, instance.item_count(), laws);
}

double multilinear_exact(const ObjectiveFunction& f, const std::vector<double>& xbar,
                         const Instance& instance, size_t guard) {
  if (xbar.size() != instance.item_count())
    throw std::invalid_argument("multilinear_exact: xbar length mismatch");
  std::vector<ItemLaw> laws;
  for (size_t i = 0; i < xbar.size(); ++i) {
    if (xbar[i] < -1e-12 || xbar[i] > 1.0 + 1e-12)
      throw std::invalid_argument("multilinear_exact: xbar outside [0,1]");
    const double xi = std::clamp(xbar[i], 0.0, 1.0);
    ItemLaw law;
    law.item = i;
    std::map<int, double> merged;
    merged[0] = 1.0 - xi;
    if (xi > 0.0) {
      for (const auto& [reward, p] : reward_distribution(instance.items[i]))
        merged[reward] += xi * p;
    }
    for (const auto& [reward, p] : merged)
      if (p > 0.0) law.outcomes.emplace_back(reward, p);
    laws.push_back(std::move(law));
  }
  if (nontrivial_count(laws) > guard)
    throw std::domain_error("multilinear_exact: enumeration guard exceeded");
  return enumerate_expectation(f, instance.item_count(), laws);
}

namespace {

struct SamplingTables {
  // per item: outcome rewards and cumulative probabilities
  std::vector<std::vector<int>> rewards;
  std::vector<std::vector<double>> cum;
};

SamplingTables build_tables(const Instance& instance) {
  SamplingTables t;
  t.rewards.resize(instance.item_count());
  t.cum.resize(instance.item_count());
  for (size_t i = 0; i < instance.item_count(); ++i) {
    double acc = 0.0;
    for (const auto& [reward, p] : reward_distribution(instance.items[i])) {
      acc += p;
      t.rewards[i].push_back(reward);
      t.cum[i].push_back(acc);
    }
  }
  return t;
}

int draw_reward(const SamplingTables& t, size_t item, Rng& rng) {
  const size_t k = sample_cumulative(rng, t.cum[item]);
  return t.rewards[item].empty() ? 0 : t.rewards[item][k];
}

}  // namespace

Estimate multilinear_estimate(const ObjectiveFunction& f, const std::vector<double>& xbar,
                              const Instance& instance, size_t num_samples, uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("multilinear_estimate: need samples >= 1");
  const SamplingTables tables = build_tables(instance);
  RunningStats stats;
  RewardVector r(instance.item_count(), 0);
  for (size_t k = 0; k < num_samples; ++k) {
    Rng rng(derive_seed(seed, k));
    for (size_t i = 0; i < instance.item_count(); ++i) {
      const double u = rng.next_double();
      const int reward = draw_reward(tables, i, rng);
      r[i] = (u < xbar[i]) ? reward : 0;
    }
    stats.add(f.evaluate(r));
  }
  return {stats.mean(), stats.stderr_mean(), stats.count()};
}

Estimate marginal_weight_estimate(const ObjectiveFunction& f, const std::vector<double>& xbar,
                                  size_t item, const Instance& instance, size_t num_samples,
                                  uint64_t seed) {
  if (item >= instance.item_count())
    throw std::invalid_argument("marginal_weight_estimate: item out of range");
  const SamplingTables tables = build_tables(instance);
  RunningStats stats;
  RewardVector r(instance.item_count(), 0);
  for (size_t k = 0; k < num_samples; ++k) {
    Rng rng(derive_seed(seed, k));
    int drawn_for_item = 0;
    bool item_included = false;
    for (size_t i = 0; i < instance.item_count(); ++i) {
      const double u = rng.next_double();
      const int reward = draw_reward(tables, i, rng);
      r[i] = (u < xbar[i]) ? reward : 0;
      if (i == item) {
        drawn_for_item = reward;
        item_included = u < xbar[i];
      }
    }
    if (item_included) {
      // forcing an already-included item changes nothing
      stats.add(0.0);
    } else {
      const double base = f.evaluate(r);
      r[item] = drawn_for_item;
      const double forced = f.evaluate(r);
      r[item] = 0;
      stats.add(forced - base);
    }
  }
  return {stats.mean(), stats.stderr_mean(), stats.count()};
}

LatticeCheckReport check_monotone_lattice_submodular(const ObjectiveFunction& f, size_t n, int M,
                                                     size_t pair_guard, uint64_t seed,
                                                     size_t max_violations) {
  if (f.arity() != n) throw std::invalid_argument("checker: arity mismatch");
  const double tol = 1e-9;
  LatticeCheckReport report;

  double vector_count = std::pow(static_cast<double>(M + 1), static_cast<double>(n));
  report.exhaustive = vector_count * vector_count <= static_cast<double>(pair_guard);

  RewardVector u(n, 0), v(n, 0), lo(n, 0), hi(n, 0);
  auto check_pair = [&](const RewardVector& a, const RewardVector& b) {
    ++report.pairs_checked;
    bool a_le_b = true;
    for (size_t i = 0; i < n; ++i) {
      lo[i] = std::min(a[i], b[i]);
      hi[i] = std::max(a[i], b[i]);
      if (a[i] > b[i]) a_le_b = false;
    }
    const double fa = f.evaluate(a), fb = f.evaluate(b);
    if (a_le_b && fa > fb + tol && report.violations.size() < max_violations)
      report.violations.push_back({a, b, "monotone", fa - fb});
    const double lhs = fa + fb;
    const double rhs = f.evaluate(lo) + f.evaluate(hi);
    if (lhs + tol < rhs && report.violations.size() < max_violations)
      report.violations.push_back({a, b, "lattice-submodular", rhs - lhs});
  };

  if (report.exhaustive) {
    const size_t count = static_cast<size_t>(std::llround(vector_count));
    auto decode = [&](size_t code, RewardVector& out) {
      for (size_t i = 0; i < n; ++i) {
        out[i] = static_cast<int>(code % (M + 1));
        code /= (M + 1);
      }
    };
    for (size_t a = 0; a < count; ++a) {
      decode(a, u);
      for (size_t b = 0; b < count; ++b) {
        decode(b, v);
        check_pair(u, v);
      }
    }
  } else {
    Rng rng(seed);
    for (size_t k = 0; k < pair_guard; ++k) {
      for (size_t i = 0; i < n; ++i) {
        u[i] = static_cast<int>(rng.next_below(M + 1));
        v[i] = static_cast<int>(rng.next_below(M + 1));
      }
      check_pair(u, v);
    }
  }
  return report;
}

}  // namespace stoknap
