#include "stoknap/gen.hpp"

#include <algorithm>
#include <stdexcept>

#include "stoknap/objective.hpp"
#include "stoknap/rng.hpp"

namespace stoknap {

namespace {

// Random probabilities as multiples of 1e-4 summing exactly to 1, so the
// decimal-string file round-trip is drift-free.
std::vector<double> random_simplex(Rng& rng, size_t k) {
  std::vector<uint64_t> parts(k, 1);
  uint64_t remaining = 10000 - k;
  for (size_t j = 0; j + 1 < k; ++j) {
    const uint64_t take = rng.next_below(remaining + 1);
    parts[j] += take;
    remaining -= take;
  }
  parts[k - 1] += remaining;
  std::vector<double> out(k);
  for (size_t j = 0; j < k; ++j) out[j] = static_cast<double>(parts[j]) * 1e-4;
  return out;
}

std::vector<int> random_support(Rng& rng, int budget, size_t max_support) {
  const size_t want = 1 + rng.next_below(max_support);
  std::vector<int> sizes;
  for (int s = 1; s <= budget; ++s) sizes.push_back(s);
  // partial Fisher-Yates, then sort the chosen prefix
  for (size_t j = 0; j < std::min(want, sizes.size()); ++j) {
    const size_t pick = j + rng.next_below(sizes.size() - j);
    std::swap(sizes[j], sizes[pick]);
  }
  sizes.resize(std::min(want, sizes.size()));
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

RewardCurve random_curve(Rng& rng, int budget, int reward_bound) {
  RewardCurve curve;
  int level = static_cast<int>(rng.next_below(reward_bound + 1));
  for (int s = 1; s <= budget; ++s) {
    curve.values[s] = level;
    if (level < reward_bound && rng.next_double() < 0.5)
      level = std::min(reward_bound, level + 1 + static_cast<int>(rng.next_below(2)));
  }
  return curve;
}

double quarter_weight(Rng& rng) { return 0.25 * (1 + rng.next_below(8)); }

std::shared_ptr<const ObjectiveFunction> make_objective(const Instance& inst,
                                                        ObjectiveKind kind, Rng& rng,
                                                        size_t n_base) {
  if (kind == ObjectiveKind::kRotate) {
    switch (rng.next_below(3)) {
      case 0: kind = ObjectiveKind::kAdditive; break;
      case 1: kind = ObjectiveKind::kConcaveOfSum; break;
      default: kind = ObjectiveKind::kNestedCoverage; break;
    }
  }
  std::vector<std::string> ids;
  for (const auto& item : inst.items) ids.push_back(item.id);

  // per-partition parameters broadcast to every member
  const size_t parts = inst.partition_count();
  switch (kind) {
    case ObjectiveKind::kAdditive:
    case ObjectiveKind::kConcaveOfSum: {
      std::vector<double> per_part(parts);
      for (auto& w : per_part) w = quarter_weight(rng);
      std::vector<double> weights(inst.item_count());
      for (size_t i = 0; i < inst.item_count(); ++i) weights[i] = per_part[inst.partition_of(i)];
      if (kind == ObjectiveKind::kAdditive) {
        return std::make_shared<ObjectiveFunction>(
            ObjectiveFunction::additive(ids, weights, inst.reward_bound));
      }
      const double knee =
          0.5 * (1 + rng.next_below(2 * std::max<size_t>(1, n_base) * inst.reward_bound));
      const double final_slope = 0.25 * rng.next_below(3);  // flattens after the knee
      return std::make_shared<ObjectiveFunction>(ObjectiveFunction::concave_of_sum(
          ids, weights, {{0.0, 0.0}, {knee, knee}}, final_slope, inst.reward_bound));
    }
    case ObjectiveKind::kNestedCoverage: {
      const size_t elements = parts + 1 + rng.next_below(3);
      std::vector<double> element_weights(elements);
      for (auto& w : element_weights) w = quarter_weight(rng);
      std::vector<std::vector<int>> per_part(parts, std::vector<int>(elements));
      for (auto& row : per_part) {
        for (auto& theta : row) {
          // 1..M covers at that reward level, M+1 never covers
          theta = 1 + static_cast<int>(rng.next_below(inst.reward_bound + 1));
        }
      }
      std::vector<std::vector<int>> thresholds(inst.item_count());
      for (size_t i = 0; i < inst.item_count(); ++i)
        thresholds[i] = per_part[inst.partition_of(i)];
      return std::make_shared<ObjectiveFunction>(ObjectiveFunction::nested_coverage(
          ids, element_weights, thresholds, inst.reward_bound));
    }
    default: break;
  }
  throw std::logic_error("unreachable objective kind");
}

}  // namespace

Instance generate_random_instance(const RandomInstanceParams& params, uint64_t seed) {
  if (params.n_base < 1 || params.n_base > 26)
    throw std::invalid_argument("generator: n_base outside [1, 26]");
  if (params.budget < 1 || params.budget > 12)
    throw std::invalid_argument("generator: budget outside [1, 12]");
  if (params.reward_bound < 1 || params.reward_bound > 4)
    throw std::invalid_argument("generator: reward bound outside [1, 4]");

  Rng rng(derive_seed(seed, 0xa11));
  std::vector<BaseItem> bases;
  for (size_t k = 0; k < params.n_base; ++k) {
    BaseItem base;
    base.id = std::string(1, static_cast<char>('A' + k));
    const auto sizes = random_support(rng, params.budget, params.max_support);
    const auto probs = random_simplex(rng, sizes.size());
    for (size_t j = 0; j < sizes.size(); ++j) base.sizes.support[sizes[j]] = probs[j];
    base.rewards = random_curve(rng, params.budget, params.reward_bound);
    bases.push_back(std::move(base));
  }
  Instance inst = expand_with_caps(std::move(bases), params.budget, params.reward_bound, nullptr);
  inst.objective = make_objective(inst, params.objective, rng, params.n_base);
  return inst;
}

Instance generate_spot_instance(const SpotInstanceParams& params, uint64_t seed) {
  if (params.n_jobs < 1 || params.n_instances < 1)
    throw std::invalid_argument("generator: need at least one job and one instance");
  if (params.budget < 1 || params.budget > 12)
    throw std::invalid_argument("generator: budget outside [1, 12]");

  Rng rng(derive_seed(seed, 0x590f));
  std::vector<SpotInstance> catalog;
  for (size_t m = 0; m < params.n_instances; ++m) {
    SpotInstance spot;
    spot.instance_id = "vm" + std::to_string(m);
    const auto sizes = random_support(rng, params.budget, 3);
    const auto probs = random_simplex(rng, sizes.size());
    for (size_t j = 0; j < sizes.size(); ++j)
      spot.cost_until_interruption.support[sizes[j]] = probs[j];
    for (size_t j = 0; j < params.n_jobs; ++j) {
      SpotJobProfile job;
      job.job_id = "job" + std::to_string(j);
      // setup cost may eat the first dollars: progress 0 is valid
      RewardCurve curve = random_curve(rng, params.budget, params.reward_bound);
      job.progress = curve.values;
      spot.jobs.push_back(std::move(job));
    }
    catalog.push_back(std::move(spot));
  }
  Instance inst = spot_reduce(catalog, params.budget, params.reward_bound, nullptr);

  Rng obj_rng(derive_seed(seed, 0x0b1));
  inst.objective = make_objective(inst, ObjectiveKind::kRotate, obj_rng, params.n_instances);
  return inst;
}

}  // namespace stoknap
