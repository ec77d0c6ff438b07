#include "stoknap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "stoknap/rng.hpp"
#include "stoknap/stats.hpp"

namespace stoknap {

namespace {

// Static contiguous chunks; work item k always lands in the same chunk
// slot, so results are independent of the thread count.
template <typename Fn>
void parallel_for(size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const size_t lo = w * chunk;
    const size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (size_t k = lo; k < hi; ++k) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

// ---- exact adaptive optimum ------------------------------------------------

namespace {

struct DpContext {
  const Instance* instance = nullptr;
  std::vector<std::vector<size_t>> partition_members;  // partition -> item idxs
  size_t num_partitions = 0;
  int budget = 0;
  size_t status_base = 0;    // M + 2
  size_t status_codes = 0;   // status_base ^ num_partitions
  std::vector<double> value;
  std::vector<char> computed;
  std::vector<int> action;
  std::unordered_map<size_t, double> f_cache;
  RewardVector scratch;

  size_t encode(const std::vector<int>& statuses, int elapsed) const {
    size_t code = 0;
    for (size_t k = num_partitions; k-- > 0;) code = code * status_base + statuses[k];
    return code * (budget + 1) + elapsed;
  }

  double f_of_statuses(const std::vector<int>& statuses, size_t status_code) {
    auto it = f_cache.find(status_code);
    if (it != f_cache.end()) return it->second;
    std::fill(scratch.begin(), scratch.end(), 0);
    for (size_t k = 0; k < num_partitions; ++k) {
      if (statuses[k] > 0) scratch[partition_members[k].front()] = statuses[k] - 1;
    }
    const double v = instance->objective->evaluate(scratch);
    f_cache.emplace(status_code, v);
    return v;
  }

  double solve(std::vector<int>& statuses, int elapsed) {
    size_t status_code = 0;
    for (size_t k = num_partitions; k-- > 0;) status_code = status_code * status_base + statuses[k];
    const size_t code = status_code * (budget + 1) + elapsed;
    if (computed[code]) return value[code];

    double best = f_of_statuses(statuses, status_code);
    int best_action = -1;
    for (size_t k = 0; k < num_partitions; ++k) {
      if (statuses[k] != 0) continue;
      for (size_t item : partition_members[k]) {
        const ExpandedItem& it = instance->items[item];
        if (elapsed + it.cap > budget) continue;
        double expectation = 0.0;
        for (const auto& [s, p] : it.sizes.support) {
          statuses[k] = 1 + it.rewards.reward_at(s);
          expectation += p * solve(statuses, elapsed + s);
        }
        statuses[k] = 0;
        if (expectation > best + 1e-12) {
          best = expectation;
          best_action = static_cast<int>(item);
        }
      }
    }
    value[code] = best;
    action[code] = best_action;
    computed[code] = 1;
    return best;
  }
};

}  // namespace

DpResult optimal_adaptive_dp(const Instance& instance, size_t state_guard) {
  if (!instance.objective) throw std::invalid_argument("dp: instance has no objective");
  if (!instance.objective->uniform_across_partitions(instance))
    throw std::invalid_argument(
        "dp: objective must be uniform across each partition's members");

  DpContext ctx;
  ctx.instance = &instance;
  ctx.budget = instance.budget;
  ctx.num_partitions = instance.partition_count();
  ctx.partition_members.assign(ctx.num_partitions, {});
  for (size_t i = 0; i < instance.item_count(); ++i)
    ctx.partition_members[instance.partition_of(i)].push_back(i);
  for (auto& members : ctx.partition_members) std::sort(members.begin(), members.end());

  ctx.status_base = static_cast<size_t>(instance.reward_bound) + 2;
  double states = static_cast<double>(ctx.budget + 1);
  for (size_t k = 0; k < ctx.num_partitions; ++k) states *= static_cast<double>(ctx.status_base);
  if (states > static_cast<double>(state_guard))
    throw std::domain_error("dp: state space exceeds guard");

  ctx.status_codes = 1;
  for (size_t k = 0; k < ctx.num_partitions; ++k) ctx.status_codes *= ctx.status_base;
  const size_t total = ctx.status_codes * (ctx.budget + 1);
  ctx.value.assign(total, 0.0);
  ctx.computed.assign(total, 0);
  ctx.action.assign(total, -1);
  ctx.scratch.assign(instance.item_count(), 0);

  std::vector<int> statuses(ctx.num_partitions, 0);
  DpResult result;
  result.value = ctx.solve(statuses, 0);
  result.action = std::move(ctx.action);
  result.states = total;
  return result;
}

// ---- Monte-Carlo suites ----------------------------------------------------

void TraceAudit::merge(const TraceAudit& other) {
  runs += other.runs;
  matroid_violations += other.matroid_violations;
  overlap_violations += other.overlap_violations;
  budget_violations += other.budget_violations;
}

void audit_trace(const Instance& instance, const ExecutionTrace& trace, TraceAudit& audit) {
  ++audit.runs;
  std::vector<int> per_partition(instance.partition_count(), 0);
  std::vector<char> used(instance.budget + 1, 0);
  int total_size = 0;
  bool overlap = false;
  for (const auto& outcome : trace.outcomes) {
    if (!outcome.real) continue;
    ++per_partition[instance.partition_of(outcome.proposal.item)];
    total_size += outcome.size;
    if (outcome.proposal.t + outcome.size - 1 > instance.budget) overlap = true;
    for (int slot = outcome.proposal.t;
         slot <= std::min(instance.budget, outcome.proposal.t + outcome.size - 1); ++slot) {
      if (used[slot]) overlap = true;
      used[slot] = 1;
    }
  }
  for (int count : per_partition)
    if (count > 1) ++audit.matroid_violations;
  if (overlap) ++audit.overlap_violations;
  if (total_size > instance.budget) ++audit.budget_violations;
}

Estimate simulate_favg(const Instance& instance, const ConstraintSystem& system,
                       const FractionalSolution& solution, size_t runs, uint64_t seed,
                       unsigned threads, TraceAudit* audit) {
  if (runs < 1) throw std::invalid_argument("simulate_favg: runs must be >= 1");
  std::vector<double> objectives(runs);
  const unsigned workers = static_cast<unsigned>(std::max<size_t>(1, std::min<size_t>(threads, runs)));
  std::vector<TraceAudit> audits(workers);
  const size_t chunk = (runs + workers - 1) / workers;
  parallel_for(workers, workers, [&](size_t w) {
    const size_t lo = w * chunk;
    const size_t hi = std::min(runs, lo + chunk);
    for (size_t k = lo; k < hi; ++k) {
      const ExecutionTrace trace =
          run_policy_once(instance, system, solution, derive_seed(seed, k));
      objectives[k] = trace.objective;
      if (audit) audit_trace(instance, trace, audits[w]);
    }
  });
  if (audit)
    for (const auto& a : audits) audit->merge(a);
  RunningStats stats;
  for (double v : objectives) stats.add(v);
  return {stats.mean(), stats.stderr_mean(), stats.count()};
}

double PairDropStat::stderr_rate() const {
  if (sampled == 0) return 0.0;
  const double p = rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(sampled));
}

std::vector<PairDropStat> crs_drop_rate(const Instance& instance, const ConstraintSystem& system,
                                        const FractionalSolution& solution, size_t runs,
                                        uint64_t seed, double track_threshold, size_t min_events,
                                        unsigned threads, TraceAudit* audit) {
  const int B = system.budget();
  std::vector<PairDropStat> stats;
  std::vector<std::vector<int>> stat_of(instance.item_count(), std::vector<int>(B + 1, -1));
  for (size_t i = 0; i < instance.item_count(); ++i) {
    for (int t = 1; t <= B; ++t) {
      const double x = solution.values[system.var_x(system.start_node(i), t)];
      if (x >= track_threshold) {
        stat_of[i][t] = static_cast<int>(stats.size());
        stats.push_back({i, t, x, 0, 0, false});
      }
    }
  }
  if (stats.empty()) return stats;

  const unsigned workers = std::max(1u, threads);
  std::vector<std::vector<std::pair<size_t, size_t>>> partial(
      workers, std::vector<std::pair<size_t, size_t>>(stats.size(), {0, 0}));
  std::vector<TraceAudit> audits(workers);
  const size_t chunk = (runs + workers - 1) / workers;
  parallel_for(workers, workers, [&](size_t w) {
    auto& mine = partial[w];
    const size_t lo = w * chunk;
    const size_t hi = std::min(runs, lo + chunk);
    for (size_t k = lo; k < hi; ++k) {
      const ExecutionTrace trace =
          run_policy_once(instance, system, solution, derive_seed(seed, k));
      if (audit) audit_trace(instance, trace, audits[w]);
      for (const auto& outcome : trace.outcomes) {
        const int idx = stat_of[outcome.proposal.item][outcome.proposal.t];
        if (idx < 0) continue;
        ++mine[idx].first;
        if (!outcome.real) ++mine[idx].second;
      }
    }
  });
  if (audit)
    for (const auto& a : audits) audit->merge(a);
  for (const auto& mine : partial) {
    for (size_t s = 0; s < stats.size(); ++s) {
      stats[s].sampled += mine[s].first;
      stats[s].dropped += mine[s].second;
    }
  }
  for (auto& s : stats) s.low_power = s.sampled < min_events;
  return stats;
}

DropDecomposition drop_bound_decomposition(const Instance& instance,
                                           const ConstraintSystem& system,
                                           const FractionalSolution& solution, size_t item, int t,
                                           size_t runs, uint64_t seed, unsigned threads) {
  DropDecomposition out;
  out.item = item;
  out.t = t;

  const size_t n = instance.item_count();
  const unsigned workers = std::max(1u, threads);
  std::vector<std::vector<size_t>> events(workers, std::vector<size_t>(n, 0));
  std::vector<size_t> sampled(workers, 0);
  const size_t chunk = (runs + workers - 1) / workers;
  parallel_for(workers, workers, [&](size_t w) {
    const size_t lo = w * chunk;
    const size_t hi = std::min(runs, lo + chunk);
    for (size_t k = lo; k < hi; ++k) {
      const ExecutionTrace trace =
          run_policy_once(instance, system, solution, derive_seed(seed, k));
      for (const auto& outcome : trace.outcomes) {
        if (outcome.proposal.item != item || outcome.proposal.t != t) continue;
        ++sampled[w];
        if (!outcome.real && outcome.blocker >= 0)
          ++events[w][trace.outcomes[outcome.blocker].proposal.item];
        break;
      }
    }
  });
  for (unsigned w = 0; w < workers; ++w) out.sampled += sampled[w];

  const size_t my_partition = instance.partition_of(item);
  const size_t u_start = system.start_node(item);
  (void)u_start;
  for (size_t j = 0; j < n; ++j) {
    BlockerRow row;
    row.blocker = j;
    row.same_partition = instance.partition_of(j) == my_partition;
    for (unsigned w = 0; w < workers; ++w) row.events += events[w][j];
    if (out.sampled > 0) {
      row.rate = static_cast<double>(row.events) / static_cast<double>(out.sampled);
      row.stderr_rate =
          std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(out.sampled));
    }

    const size_t ju = system.start_node(j);
    double before = 0.0;
    for (int ts = 1; ts < t; ++ts) {
      const double x = solution.values[system.var_x(ju, ts)];
      before += x;
      row.completed_mass += x * (1.0 - system.size_tail(j, t - ts + 1));
    }
    row.start_at_t = solution.values[system.var_x(ju, t)];
    row.mid_mass = solution.mid_mass(system, j, t);
    if (j == item) {
      row.bound = before;  // earlier copies of the probed item itself
    } else if (row.same_partition) {
      row.bound = before + 0.5 * row.start_at_t;
    } else {
      row.bound = row.mid_mass + 0.5 * row.start_at_t;
    }
    out.blockers.push_back(row);
  }
  return out;
}

// ---- closed-form survival --------------------------------------------------

double survival_closed_form(const ConstraintSystem& system, const FractionalSolution& solution,
                            const std::vector<int>& profile, size_t item) {
  const int B = system.budget();
  const size_t n = system.item_count();
  if (profile.size() != n) throw std::invalid_argument("survival: profile length mismatch");

  std::vector<std::vector<double>> x(n, std::vector<double>(B + 1, 0.0));
  std::vector<double> total(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    for (int t = 1; t <= B; ++t) {
      x[j][t] = solution.values[system.var_x(system.start_node(j), t)];
      total[j] += x[j][t];
    }
    if (j != item && total[j] > 0.0 && profile[j] < 1)
      throw std::invalid_argument("survival: profile must pin a size >= 1 for items with mass");
  }

  // partition of the probed item
  size_t my_partition = 0;
  {
    size_t p = 0;
    for (const auto& members : system.partitions()) {
      for (size_t m : members)
        if (m == item) my_partition = p;
      ++p;
    }
  }
  std::vector<char> same(n, 0);
  {
    size_t p = 0;
    for (const auto& members : system.partitions()) {
      for (size_t m : members)
        if (p == my_partition) same[m] = 1;
      ++p;
    }
  }

  double survival = 0.0;
  double first_copy = 1.0;  // prod_{tau < t} (1 - x_{i,tau})
  for (int t = 1; t <= B; ++t) {
    const double a = x[item][t] * first_copy;
    first_copy *= 1.0 - x[item][t];
    if (a <= 0.0) continue;
    double keep = 1.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == item || total[j] <= 0.0) continue;
      if (same[j]) {
        // any earlier same-partition copy blocks, whatever its fate
        for (int ts = 1; ts < t; ++ts) keep *= 1.0 - x[j][ts];
      } else {
        // copies whose pinned span covers slot t
        for (int ts = std::max(1, t - profile[j] + 1); ts < t; ++ts) keep *= 1.0 - x[j][ts];
      }
    }
    // Rivals proposed at slot t itself block i iff they precede it in the
    // uniform tie-break. Those events share one total order, so the tie
    // factor is E[1/(1+K)] over the Bernoulli count K of tied rivals;
    // the per-rival (1 - x/2) product is exact only for K <= 1.
    std::vector<double> count_dist = {1.0};
    for (size_t j = 0; j < n; ++j) {
      if (j == item || x[j][t] <= 0.0) continue;
      count_dist.push_back(0.0);
      for (size_t k = count_dist.size() - 1; k > 0; --k)
        count_dist[k] = count_dist[k] * (1.0 - x[j][t]) + count_dist[k - 1] * x[j][t];
      count_dist[0] *= 1.0 - x[j][t];
    }
    double tie_factor = 0.0;
    for (size_t k = 0; k < count_dist.size(); ++k)
      tie_factor += count_dist[k] / static_cast<double>(k + 1);
    survival += a * keep * tie_factor;
  }
  return survival;
}

Estimate survival_probe_mc(const Instance& instance, const ConstraintSystem& system,
                           const FractionalSolution& solution, const std::vector<int>& profile,
                           size_t item, size_t trials, uint64_t seed, unsigned threads) {
  const unsigned workers = std::max(1u, threads);
  std::vector<size_t> kept(workers, 0);
  const size_t chunk = (trials + workers - 1) / workers;
  parallel_for(workers, workers, [&](size_t w) {
    const size_t lo = w * chunk;
    const size_t hi = std::min(trials, lo + chunk);
    for (size_t k = lo; k < hi; ++k) {
      const uint64_t run_seed = derive_seed(seed, k);
      auto proposals = sample_proposals(system, solution, derive_seed(run_seed, 1));
      auto ordered = order_proposals(std::move(proposals), derive_seed(run_seed, 2));
      const ExecutionTrace trace =
          execute(ordered, instance, derive_seed(run_seed, 3), &profile);
      for (const auto& outcome : trace.outcomes) {
        if (outcome.proposal.item != item) continue;
        if (outcome.real) ++kept[w];
        break;  // first copy decides
      }
    }
  });
  size_t total = 0;
  for (size_t v : kept) total += v;
  const double p = trials ? static_cast<double>(total) / trials : 0.0;
  return {p, trials ? std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0, trials};
}

// ---- end-to-end ------------------------------------------------------------

EndToEndReport end_to_end_ratio(const Instance& instance, const GreedyConfig& config, size_t runs,
                                uint64_t seed, size_t dp_guard, unsigned threads) {
  EndToEndReport report;
  const ConstraintSystem system = ConstraintSystem::build(instance);
  report.greedy = continuous_greedy(instance, system, config);
  const FractionalSolution& solution = report.greedy.solution;

  const Estimate favg = simulate_favg(instance, system, solution, runs, seed, threads);
  report.favg = favg.mean;
  report.favg_stderr = favg.stderr_mean;

  try {
    report.fbar = multilinear_exact(*instance.objective, solution.xbar, instance);
    report.fbar_exact = true;
  } catch (const std::domain_error&) {
    const Estimate est = multilinear_estimate(*instance.objective, solution.xbar, instance,
                                              std::max<size_t>(runs, 10000),
                                              derive_seed(seed, 0xFBA9));
    report.fbar = est.mean;
    report.fbar_stderr = est.stderr_mean;
    report.fbar_exact = false;
  }
  report.half_margin = report.favg - report.fbar / 2.0;

  const DpResult dp = optimal_adaptive_dp(instance, dp_guard);
  report.opt = dp.value;
  if (dp.value > 0.0) report.ratio = report.favg / dp.value;
  return report;
}

// ---- reporting -------------------------------------------------------------

namespace {

std::string csv_quote(const std::string& field) {
  bool needs = false;
  for (char ch : field)
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') needs = true;
  if (!needs) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "property,instance,estimate,stderr,threshold,verdict\n";
  for (const auto& row : rows) {
    os << csv_quote(row.property) << ',' << csv_quote(row.instance_id) << ',' << row.estimate
       << ',' << row.stderr_est << ',' << row.threshold << ',' << (row.pass ? "pass" : "fail")
       << '\n';
  }
}

}  // namespace stoknap
