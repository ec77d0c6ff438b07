#include "stoknap/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stoknap/objective.hpp"

namespace stoknap {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double parse_probability(const json& value) {
  if (value.is_string()) return std::stod(value.get<std::string>());
  return value.get<double>();
}

std::string probability_string(double p) {
  // shortest decimal string that round-trips the double exactly
  return json(p).dump();
}

SizeDistribution parse_sizes(const json& obj) {
  SizeDistribution d;
  for (auto it = obj.begin(); it != obj.end(); ++it)
    d.support[std::stoi(it.key())] = parse_probability(it.value());
  return d;
}

RewardCurve parse_rewards(const json& obj) {
  RewardCurve c;
  for (auto it = obj.begin(); it != obj.end(); ++it)
    c.values[std::stoi(it.key())] = it.value().get<int>();
  return c;
}

// objective parameter lookup: expanded id first, then base id
template <typename T>
T lookup_param(const json& table, const ExpandedItem& item, const char* what) {
  if (auto it = table.find(item.id); it != table.end()) return it->get<T>();
  if (auto it = table.find(item.base_id); it != table.end()) return it->get<T>();
  throw std::invalid_argument(std::string("objective ") + what + " missing for item " + item.id +
                              " (and base " + item.base_id + ")");
}

std::shared_ptr<const ObjectiveFunction> parse_objective(const json& obj,
                                                         const Instance& instance) {
  const std::string family = obj.at("family").get<std::string>();
  std::vector<std::string> ids;
  for (const auto& item : instance.items) ids.push_back(item.id);

  if (family == "additive" || family == "concave_of_sum") {
    const json& table = obj.at("weights");
    std::vector<double> weights;
    for (const auto& item : instance.items)
      weights.push_back(lookup_param<double>(table, item, "weight"));
    if (family == "additive") {
      return std::make_shared<ObjectiveFunction>(
          ObjectiveFunction::additive(ids, weights, instance.reward_bound));
    }
    std::vector<std::pair<double, double>> breakpoints;
    for (const auto& bp : obj.at("breakpoints"))
      breakpoints.emplace_back(bp.at(0).get<double>(), bp.at(1).get<double>());
    const double final_slope = obj.value("final_slope", 0.0);
    return std::make_shared<ObjectiveFunction>(ObjectiveFunction::concave_of_sum(
        ids, weights, breakpoints, final_slope, instance.reward_bound));
  }
  if (family == "nested_coverage") {
    std::vector<double> element_weights = obj.at("element_weights").get<std::vector<double>>();
    const json& table = obj.at("thresholds");
    std::vector<std::vector<int>> thresholds;
    for (const auto& item : instance.items)
      thresholds.push_back(lookup_param<std::vector<int>>(table, item, "thresholds"));
    return std::make_shared<ObjectiveFunction>(ObjectiveFunction::nested_coverage(
        ids, element_weights, thresholds, instance.reward_bound));
  }
  throw std::invalid_argument("unknown objective family: " + family);
}

ordered_json objective_to_json(const Instance& instance) {
  const ObjectiveFunction& f = *instance.objective;
  ordered_json obj;
  switch (f.family()) {
    case ObjectiveFunction::Family::kAdditive:
    case ObjectiveFunction::Family::kConcaveOfSum: {
      obj["family"] = f.family() == ObjectiveFunction::Family::kAdditive ? "additive"
                                                                         : "concave_of_sum";
      ordered_json weights;
      for (size_t i = 0; i < instance.item_count(); ++i)
        weights[instance.items[i].id] = f.weights()[i];
      obj["weights"] = weights;
      if (f.family() == ObjectiveFunction::Family::kConcaveOfSum) {
        ordered_json bps = ordered_json::array();
        for (const auto& [x, y] : f.breakpoints()) bps.push_back(ordered_json{x, y});
        obj["breakpoints"] = bps;
        obj["final_slope"] = f.final_slope();
      }
      break;
    }
    case ObjectiveFunction::Family::kNestedCoverage: {
      obj["family"] = "nested_coverage";
      obj["element_weights"] = f.element_weights();
      ordered_json thresholds;
      for (size_t i = 0; i < instance.item_count(); ++i)
        thresholds[instance.items[i].id] = f.thresholds()[i];
      obj["thresholds"] = thresholds;
      break;
    }
  }
  return obj;
}

}  // namespace

Instance read_instance_json(std::istream& is) {
  json doc = json::parse(is);
  Instance inst;
  inst.budget = doc.at("budget").get<int>();
  inst.reward_bound = doc.at("reward_bound").get<int>();

  const bool expanded = doc.value("expanded", false);
  if (!expanded) {
    std::vector<BaseItem> bases;
    for (const auto& entry : doc.at("base_items")) {
      BaseItem base;
      base.id = entry.at("id").get<std::string>();
      base.sizes = parse_sizes(entry.at("sizes"));
      base.rewards = parse_rewards(entry.at("rewards"));
      bases.push_back(std::move(base));
    }
    inst = expand_with_caps(std::move(bases), inst.budget, inst.reward_bound, nullptr);
  } else {
    for (const auto& entry : doc.at("items")) {
      ExpandedItem item;
      item.id = entry.at("id").get<std::string>();
      item.base_id = entry.value("base_id", item.id);
      item.cap = entry.at("cap").get<int>();
      item.partition_id = entry.at("partition_id").get<std::string>();
      item.sizes = parse_sizes(entry.at("sizes"));
      item.rewards = parse_rewards(entry.at("rewards"));
      inst.matroid.partitions[item.partition_id].push_back(item.id);
      inst.items.push_back(std::move(item));
    }
    for (auto& [pid, members] : inst.matroid.partitions) {
      (void)pid;
      std::sort(members.begin(), members.end());
    }
    inst.finalize();
  }
  inst.objective = parse_objective(doc.at("objective"), inst);
  return inst;
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return read_instance_json(in);
}

void write_instance_json(const Instance& instance, std::ostream& os) {
  ordered_json doc;
  doc["budget"] = instance.budget;
  doc["reward_bound"] = instance.reward_bound;
  doc["objective"] = objective_to_json(instance);
  doc["expanded"] = true;
  ordered_json items = ordered_json::array();
  for (const auto& item : instance.items) {
    ordered_json entry;
    entry["id"] = item.id;
    entry["base_id"] = item.base_id;
    entry["cap"] = item.cap;
    entry["partition_id"] = item.partition_id;
    ordered_json sizes;
    for (const auto& [s, p] : item.sizes.support)
      sizes[std::to_string(s)] = probability_string(p);
    entry["sizes"] = sizes;
    ordered_json rewards;
    for (const auto& [s, r] : item.rewards.values) rewards[std::to_string(s)] = r;
    entry["rewards"] = rewards;
    items.push_back(entry);
  }
  doc["items"] = items;
  os << doc.dump(2) << '\n';
}

void write_instance_file(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_instance_json(instance, out);
}

void write_solution_json(const ConstraintSystem& system, const FractionalSolution& solution,
                         const SolutionMeta& meta, std::ostream& os, bool include_mid) {
  ordered_json doc;
  doc["b"] = meta.b;
  doc["delta"] = meta.delta;
  doc["seed"] = meta.seed;
  ordered_json xbar;
  for (size_t i = 0; i < system.item_count(); ++i) xbar[system.item_id(i)] = solution.xbar[i];
  doc["xbar"] = xbar;
  ordered_json x_start;
  for (size_t i = 0; i < system.item_count(); ++i) {
    ordered_json per_slot;
    for (int t = 1; t <= system.budget(); ++t) {
      const double v = solution.values[system.var_x(system.start_node(i), t)];
      if (v != 0.0) per_slot[std::to_string(t)] = v;
    }
    if (!per_slot.empty()) x_start[system.item_id(i)] = per_slot;
  }
  doc["x_start"] = x_start;
  if (include_mid) {
    ordered_json mid;
    for (size_t u = 0; u < system.node_count(); ++u) {
      const Node& node = system.nodes()[u];
      if (node.is_start()) continue;
      for (int t = 1; t <= system.budget(); ++t) {
        const double v = solution.values[system.var_x(u, t)];
        if (v != 0.0) mid[system.variable_name(system.var_x(u, t))] = v;
      }
    }
    doc["mid"] = mid;
  }
  os << doc.dump(2) << '\n';
}

void write_solution_file(const ConstraintSystem& system, const FractionalSolution& solution,
                         const SolutionMeta& meta, const std::string& path, bool include_mid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_solution_json(system, solution, meta, out, include_mid);
}

FractionalSolution read_solution_json(const ConstraintSystem& system, std::istream& is,
                                      SolutionMeta* meta) {
  json doc = json::parse(is);
  if (meta) {
    meta->b = doc.value("b", 0.5);
    meta->delta = doc.value("delta", 0.0);
    meta->seed = doc.value("seed", uint64_t{0});
  }
  const int B = system.budget();
  std::vector<std::vector<double>> x_start(system.item_count(),
                                           std::vector<double>(B + 1, 0.0));
  std::vector<double> s_start1(system.item_count(), 0.0);
  const json& table = doc.at("x_start");
  for (size_t i = 0; i < system.item_count(); ++i) {
    auto it = table.find(system.item_id(i));
    if (it == table.end()) continue;
    for (auto slot = it->begin(); slot != it->end(); ++slot) {
      const int t = std::stoi(slot.key());
      if (t < 1 || t > B) throw std::invalid_argument("solution slot outside budget");
      x_start[i][t] = slot.value().get<double>();
    }
  }
  // minimal feasible start mass: the telescoped sum of starts
  for (size_t i = 0; i < system.item_count(); ++i) {
    for (int t = 1; t <= B; ++t) s_start1[i] += x_start[i][t];
  }
  return assemble_solution(system, x_start, s_start1);
}

FractionalSolution read_solution_file(const ConstraintSystem& system, const std::string& path,
                                      SolutionMeta* meta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open solution file: " + path);
  return read_solution_json(system, in, meta);
}

}  // namespace stoknap
