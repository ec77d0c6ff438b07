#include "stoknap/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stoknap {

double SizeDistribution::total_mass() const {
  double sum = 0.0;
  for (const auto& [s, p] : support) sum += p;
  return sum;
}

int SizeDistribution::max_size() const {
  return support.empty() ? 0 : support.rbegin()->first;
}

double SizeDistribution::prob(int size) const {
  auto it = support.find(size);
  return it == support.end() ? 0.0 : it->second;
}

double SizeDistribution::tail(int s) const {
  double sum = 0.0;
  for (auto it = support.lower_bound(s); it != support.end(); ++it) sum += it->second;
  return sum;
}

double SizeDistribution::cdf(int s) const {
  double sum = 0.0;
  for (const auto& [size, p] : support) {
    if (size > s) break;
    sum += p;
  }
  return sum;
}

int RewardCurve::reward_at(int size) const {
  auto it = values.upper_bound(size);
  if (it == values.begin()) return 0;
  return std::prev(it)->second;
}

size_t Instance::item_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::invalid_argument("unknown item id: " + id);
  return it->second;
}

size_t Instance::partition_of(size_t item_idx) const {
  return partition_index_.at(item_idx);
}

void Instance::finalize() {
  std::sort(items.begin(), items.end(),
            [](const ExpandedItem& a, const ExpandedItem& b) { return a.id < b.id; });
  index_.clear();
  for (size_t i = 0; i < items.size(); ++i) index_[items[i].id] = i;

  partition_index_.assign(items.size(), 0);
  size_t pidx = 0;
  for (const auto& [pid, members] : matroid.partitions) {
    for (const auto& member : members) {
      auto it = index_.find(member);
      if (it != index_.end()) partition_index_[it->second] = pidx;
    }
    ++pidx;
  }
  num_partitions_ = pidx;
}

namespace {

std::string capped_id(const std::string& base_id, int cap) {
  std::ostringstream os;
  os << base_id << '#';
  if (cap < 10) os << '0';
  os << cap;
  return os.str();
}

}  // namespace

ExpandedItem apply_size_cap(const BaseItem& item, int b) {
  if (b < 1) throw std::invalid_argument("size cap must be >= 1");
  ExpandedItem out;
  out.id = capped_id(item.id, b);
  out.base_id = item.id;
  out.cap = b;
  out.partition_id = item.id;

  double below = 0.0;
  for (const auto& [s, p] : item.sizes.support) {
    if (s < b) {
      out.sizes.support[s] += p;
      below += p;
    }
  }
  // tail as a complement keeps the total mass bit-exact
  const double tail = item.sizes.total_mass() - below;
  if (tail > 0.0) out.sizes.support[b] += tail;

  for (const auto& [s, p] : out.sizes.support) {
    (void)p;
    out.rewards.values[s] = item.rewards.reward_at(s);
  }
  return out;
}

Instance expand_with_caps(std::vector<BaseItem> base_items, int budget, int reward_bound,
                          std::shared_ptr<const ObjectiveFunction> objective) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  std::set<std::string> seen;
  for (const auto& it : base_items) {
    if (!seen.insert(it.id).second)
      throw std::invalid_argument("duplicate base item id: " + it.id);
  }

  Instance inst;
  inst.budget = budget;
  inst.reward_bound = reward_bound;
  inst.objective = std::move(objective);
  for (const auto& base : base_items) {
    auto& members = inst.matroid.partitions[base.id];
    for (int b = 1; b <= budget; ++b) {
      ExpandedItem item = apply_size_cap(base, b);
      members.push_back(item.id);
      inst.items.push_back(std::move(item));
    }
    std::sort(members.begin(), members.end());
  }
  inst.finalize();
  return inst;
}

Instance spot_reduce(const std::vector<SpotInstance>& instances, int budget, int reward_bound,
                     std::shared_ptr<const ObjectiveFunction> objective) {
  if (instances.empty()) throw std::invalid_argument("no spot instances given");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");

  Instance inst;
  inst.budget = budget;
  inst.reward_bound = reward_bound;
  inst.objective = std::move(objective);

  for (const auto& spot : instances) {
    if (spot.jobs.empty()) throw std::invalid_argument("spot instance without jobs: " + spot.instance_id);
    auto& members = inst.matroid.partitions[spot.instance_id];
    for (const auto& job : spot.jobs) {
      int prev = 0;
      for (const auto& [dollars, epochs] : job.progress) {
        if (epochs < prev)
          throw std::invalid_argument("progress curve decreases for job " + job.job_id +
                                      " on instance " + spot.instance_id);
        prev = epochs;
      }
      BaseItem pseudo;
      pseudo.id = job.job_id + "@" + spot.instance_id;
      pseudo.sizes = spot.cost_until_interruption;
      pseudo.rewards.values = job.progress;
      for (int b = 1; b <= budget; ++b) {
        ExpandedItem item = apply_size_cap(pseudo, b);
        item.partition_id = spot.instance_id;
        members.push_back(item.id);
        inst.items.push_back(std::move(item));
      }
    }
    std::sort(members.begin(), members.end());
  }
  inst.finalize();
  return inst;
}

std::map<int, double> reward_distribution(const ExpandedItem& item) {
  std::map<int, double> q;
  for (const auto& [s, p] : item.sizes.support) q[item.rewards.reward_at(s)] += p;
  return q;
}

namespace {

void check_distribution(const std::string& subject, const SizeDistribution& d, int max_size,
                        std::vector<Violation>& out) {
  for (const auto& [s, p] : d.support) {
    if (s < 1)
      out.push_back({subject, "size " + std::to_string(s) + " below 1"});
    if (max_size > 0 && s > max_size)
      out.push_back({subject, "size " + std::to_string(s) + " exceeds maximum " + std::to_string(max_size)});
    if (p <= 0.0 || p > 1.0 + SizeDistribution::kMassTolerance)
      out.push_back({subject, "probability " + std::to_string(p) + " at size " + std::to_string(s) +
                                  " outside (0,1]"});
  }
  const double mass = d.total_mass();
  if (std::abs(mass - 1.0) > SizeDistribution::kMassTolerance)
    out.push_back({subject, "probabilities sum to " + std::to_string(mass) +
                                " (residual " + std::to_string(mass - 1.0) + ")"});
}

}  // namespace

std::vector<Violation> validate_instance(const Instance& instance) {
  std::vector<Violation> out;
  if (instance.budget < 1) out.push_back({"instance", "budget below 1"});
  if (instance.reward_bound < 1) out.push_back({"instance", "reward bound below 1"});
  if (!instance.objective) out.push_back({"instance", "missing objective"});

  std::set<std::string> ids;
  for (const auto& item : instance.items) {
    if (!ids.insert(item.id).second) out.push_back({item.id, "duplicate item id"});

    check_distribution(item.id, item.sizes, item.cap, out);
    if (item.cap < 1) out.push_back({item.id, "cap below 1"});
    if (item.cap > instance.budget)
      out.push_back({item.id, "cap " + std::to_string(item.cap) + " exceeds budget"});

    int prev_size = 0, prev_reward = -1;
    for (const auto& [s, r] : item.rewards.values) {
      if (r < 0 || r > instance.reward_bound)
        out.push_back({item.id, "reward " + std::to_string(r) + " at size " + std::to_string(s) +
                                    " outside [0, M]"});
      if (prev_reward > r)
        out.push_back({item.id, "reward curve decreases between sizes " + std::to_string(prev_size) +
                                    " and " + std::to_string(s)});
      prev_size = s;
      prev_reward = r;
    }
    for (const auto& [s, p] : item.sizes.support) {
      (void)p;
      if (item.rewards.values.find(s) == item.rewards.values.end())
        out.push_back({item.id, "reward undefined at support size " + std::to_string(s)});
    }
  }

  // matroid must cover exactly the item set, with disjoint partitions
  std::set<std::string> covered;
  for (const auto& [pid, members] : instance.matroid.partitions) {
    for (const auto& member : members) {
      if (!covered.insert(member).second)
        out.push_back({pid, "item " + member + " appears in more than one partition"});
      if (ids.find(member) == ids.end())
        out.push_back({pid, "partition references unknown item " + member});
    }
  }
  for (const auto& id : ids) {
    if (covered.find(id) == covered.end())
      out.push_back({id, "item not covered by any partition"});
  }
  return out;
}

}  // namespace stoknap
