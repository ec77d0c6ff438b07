#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "stoknap/gen.hpp"
#include "stoknap/rng.hpp"
#include "stoknap/rounding.hpp"

using namespace stoknap;
using namespace stoknap::testing;

namespace {

struct Setup {
  Instance instance;
  ConstraintSystem system;
  FractionalSolution solution;
};

// instance + hand-built start values (x_start[item][t])
Setup make_setup(std::vector<ExpandedItem> items, int budget,
                 std::map<std::string, std::map<int, double>> starts) {
  Setup setup;
  setup.instance = instance_of(std::move(items), budget, 3);
  setup.instance.objective = additive_uniform(setup.instance);
  setup.system = ConstraintSystem::build(setup.instance);
  std::vector<std::vector<double>> x_start(setup.instance.item_count(),
                                           std::vector<double>(budget + 1, 0.0));
  std::vector<double> s1(setup.instance.item_count(), 0.0);
  for (const auto& [id, slots] : starts) {
    const size_t i = setup.instance.item_index(id);
    for (const auto& [t, x] : slots) {
      x_start[i][t] = x;
      s1[i] += x;
    }
  }
  setup.solution = assemble_solution(setup.system, x_start, s1);
  return setup;
}

}  // namespace

TEST_CASE("proposal sampling follows the start probabilities") {
  SUBCASE("zero solution never proposes") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}})}, 2, {});
    for (uint64_t seed = 0; seed < 50; ++seed)
      CHECK(sample_proposals(s.system, s.solution, seed).empty());
  }
  SUBCASE("certain pair always proposed") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}})}, 2, {{"A", {{1, 1.0}}}});
    for (uint64_t seed = 0; seed < 50; ++seed) {
      const auto proposals = sample_proposals(s.system, s.solution, seed);
      REQUIRE(proposals.size() == 1);
      CHECK(proposals[0].t == 1);
    }
  }
  SUBCASE("binomial frequency at one half") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}})}, 2, {{"A", {{1, 0.5}}}});
    size_t hits = 0;
    const size_t trials = 100000;
    for (uint64_t seed = 0; seed < trials; ++seed)
      hits += sample_proposals(s.system, s.solution, seed).size();
    const double rate = static_cast<double>(hits) / trials;
    CHECK(std::abs(rate - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
  }
  SUBCASE("start probability above one is rejected") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}})}, 2, {{"A", {{1, 1.0}}}});
    s.solution.values[s.system.var_x(s.system.start_node(0), 1)] = 1.5;
    CHECK_THROWS(sample_proposals(s.system, s.solution, 1));
  }
}

TEST_CASE("ordering is stable in t with uniform ties") {
  SUBCASE("slots sort ascending") {
    std::vector<Proposal> proposals = {{0, 3}, {1, 1}, {2, 2}};
    const auto ordered = order_proposals(proposals, 9);
    CHECK(ordered[0].t == 1);
    CHECK(ordered[1].t == 2);
    CHECK(ordered[2].t == 3);
  }
  SUBCASE("equal slots split evenly across seeds") {
    std::vector<Proposal> proposals = {{0, 1}, {1, 1}};
    size_t first_wins = 0;
    const size_t trials = 100000;
    for (uint64_t seed = 0; seed < trials; ++seed) {
      const auto ordered = order_proposals(proposals, seed);
      first_wins += ordered[0].item == 0;
    }
    const double rate = static_cast<double>(first_wins) / trials;
    CHECK(std::abs(rate - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
  }
  SUBCASE("empty input") { CHECK(order_proposals({}, 1).empty()); }
}

TEST_CASE("execution traces by hand") {
  SUBCASE("single proposal is real and draws its reward") {
    auto s = make_setup({item("A", {{1, 0.5}, {2, 0.5}}, {{1, 1}, {2, 2}})}, 2,
                        {{"A", {{1, 1.0}}}});
    std::map<int, size_t> reward_counts;
    const size_t trials = 100000;
    for (uint64_t seed = 0; seed < trials; ++seed) {
      const auto trace = execute({{0, 1}}, s.instance, seed);
      REQUIRE(trace.outcomes.size() == 1);
      CHECK(trace.outcomes[0].real);
      ++reward_counts[trace.outcomes[0].reward];
    }
    const double p1 = static_cast<double>(reward_counts[1]) / trials;
    CHECK(std::abs(p1 - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
  }
  SUBCASE("same-slot loser is blocked by the occupied slot") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}}), item("B", {{1, 1.0}}, {{1, 1}})}, 1,
                        {});
    const auto trace = execute({{0, 1}, {1, 1}}, s.instance, 3);
    REQUIRE(trace.outcomes.size() == 2);
    CHECK(trace.outcomes[0].real);
    CHECK(!trace.outcomes[1].real);
    CHECK(trace.outcomes[1].cause == BlockCause::kSlotUnavailable);
    CHECK(trace.outcomes[1].blocker == 0);
  }
  SUBCASE("disjoint spans coexist") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}}), item("B", {{1, 1.0}}, {{1, 1}})}, 2,
                        {});
    const auto trace = execute({{0, 1}, {1, 2}}, s.instance, 3);
    CHECK(trace.outcomes[0].real);
    CHECK(trace.outcomes[1].real);
    CHECK(trace.rewards[0] == 1);
    CHECK(trace.rewards[1] == 1);
  }
  SUBCASE("same-partition blocking counts phantoms") {
    // C (partition P) blocked by slot, then D (partition P) at a free
    // slot is still blocked by the partition
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}}),
                         item("C", {{1, 1.0}}, {{1, 1}}, 1, "P"),
                         item("D", {{1, 1.0}}, {{1, 1}}, 1, "P")},
                        3, {});
    const size_t a = s.instance.item_index("A");
    const size_t c = s.instance.item_index("C");
    const size_t d = s.instance.item_index("D");
    const auto trace = execute({{a, 1}, {c, 1}, {d, 3}}, s.instance, 3);
    CHECK(trace.outcomes[0].real);
    CHECK(!trace.outcomes[1].real);  // slot taken by A
    CHECK(trace.outcomes[1].cause == BlockCause::kSlotUnavailable);
    CHECK(!trace.outcomes[2].real);  // partition P already touched by phantom C
    CHECK(trace.outcomes[2].cause == BlockCause::kPartitionUsed);
    CHECK(trace.outcomes[2].blocker == 1);
  }
}

TEST_CASE("phantom spans block exactly like real spans") {
  // A: certain size 2 at t=1; B: probe at t=2; D: certain size 1 at t=1.
  // With D present and winning the tie, A turns phantom but must keep
  // blocking B through its simulated span.
  auto with_d = make_setup({item("A", {{2, 1.0}}, {{1, 0}, {2, 2}}),
                            item("B", {{1, 1.0}}, {{1, 1}}),
                            item("D", {{1, 1.0}}, {{1, 3}})},
                           3, {});
  const size_t a = with_d.instance.item_index("A");
  const size_t b = with_d.instance.item_index("B");
  const size_t d = with_d.instance.item_index("D");

  size_t d_first_runs = 0;
  for (uint64_t seed = 0; seed < 2000; ++seed) {
    const auto ordered = order_proposals({{a, 1}, {d, 1}, {b, 2}}, seed);
    const auto trace = execute(ordered, with_d.instance, 77);  // fixed exec stream
    REQUIRE(trace.outcomes.size() == 3);
    const bool d_first = ordered[0].item == d;
    d_first_runs += d_first;
    if (d_first) {
      CHECK(trace.outcomes[0].real);   // D
      CHECK(!trace.outcomes[1].real);  // A loses slot 1
      CHECK(trace.outcomes[1].cause == BlockCause::kSlotUnavailable);
    } else {
      CHECK(trace.outcomes[0].real);  // A
    }
    // B is phantom either way: A's span (real or simulated) covers t=2
    CHECK(!trace.outcomes[2].real);
    CHECK(trace.outcomes[2].cause == BlockCause::kSlotUnavailable);
    CHECK(with_d.instance.items[trace.outcomes[2].blocker >= 0
                                    ? trace.outcomes[trace.outcomes[2].blocker].proposal.item
                                    : 0]
              .id == "A");
    // the simulated size draw is coupled: same stream as the real branch
    for (const auto& outcome : trace.outcomes) {
      if (outcome.proposal.item == a) CHECK(outcome.size == 2);
    }
  }
  CHECK(d_first_runs > 500);
  CHECK(d_first_runs < 1500);
}

TEST_CASE("run_policy_once composes the stages") {
  SUBCASE("zero solution scores f(0)") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 1}})}, 2, {});
    const auto trace = run_policy_once(s.instance, s.system, s.solution, 5);
    CHECK(trace.objective == doctest::Approx(0.0));
  }
  SUBCASE("certain singleton scores its reward every run") {
    auto s = make_setup({item("A", {{1, 1.0}}, {{1, 2}})}, 2, {{"A", {{1, 1.0}}}});
    for (uint64_t seed = 0; seed < 20; ++seed) {
      const auto trace = run_policy_once(s.instance, s.system, s.solution, seed);
      CHECK(trace.objective == doctest::Approx(2.0));
    }
  }
  SUBCASE("same seed reproduces the trace bit-identically") {
    RandomInstanceParams params;
    params.n_base = 2;
    params.budget = 4;
    const auto inst = generate_random_instance(params, 31);
    const auto sys = ConstraintSystem::build(inst);
    std::vector<double> w(inst.item_count(), 1.0);
    const auto sol = solve_weighted(sys, w);
    const auto t1 = run_policy_once(inst, sys, sol, 123);
    const auto t2 = run_policy_once(inst, sys, sol, 123);
    REQUIRE(t1.outcomes.size() == t2.outcomes.size());
    for (size_t k = 0; k < t1.outcomes.size(); ++k) {
      CHECK(t1.outcomes[k].proposal.item == t2.outcomes[k].proposal.item);
      CHECK(t1.outcomes[k].real == t2.outcomes[k].real);
      CHECK(t1.outcomes[k].size == t2.outcomes[k].size);
    }
    CHECK(t1.objective == t2.objective);
  }
}

TEST_CASE("every run satisfies the execution invariants") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    RandomInstanceParams params;
    params.n_base = 1 + rng.next_below(4);
    params.budget = 2 + static_cast<int>(rng.next_below(6));
    params.reward_bound = 1 + static_cast<int>(rng.next_below(3));
    const auto inst = generate_random_instance(params, derive_seed(7000, trial));
    const auto sys = ConstraintSystem::build(inst);
    std::vector<double> weights(inst.item_count());
    for (auto& w : weights) w = rng.next_double();
    const auto sol = solve_weighted(sys, weights);

    for (uint64_t seed = 0; seed < 500; ++seed) {
      const auto trace = run_policy_once(inst, sys, sol, derive_seed(trial, seed));
      std::vector<int> partition_real(inst.partition_count(), 0);
      std::vector<char> slot_used(inst.budget + 1, 0);
      int total_size = 0;
      for (const auto& outcome : trace.outcomes) {
        if (!outcome.real) {
          CHECK(outcome.cause != BlockCause::kNone);
          CHECK(outcome.blocker >= 0);
          CHECK(outcome.reward == 0);
          continue;
        }
        ++partition_real[inst.partition_of(outcome.proposal.item)];
        total_size += outcome.size;
        CHECK(outcome.proposal.t + outcome.size - 1 <= inst.budget);
        for (int slot = outcome.proposal.t; slot < outcome.proposal.t + outcome.size; ++slot) {
          CHECK(!slot_used[slot]);  // real spans pairwise disjoint
          slot_used[slot] = 1;
        }
        CHECK(outcome.reward ==
              inst.items[outcome.proposal.item].rewards.reward_at(outcome.size));
      }
      for (int count : partition_real) CHECK(count <= 1);
      CHECK(total_size <= inst.budget);
    }
  }
}
