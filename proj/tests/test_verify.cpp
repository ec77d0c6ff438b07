#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "stoknap/cgreedy.hpp"
#include "stoknap/gen.hpp"
#include "stoknap/rng.hpp"
#include "stoknap/verify.hpp"

using namespace stoknap;
using namespace stoknap::testing;

namespace {

FractionalSolution hand_solution(const Instance& inst, const ConstraintSystem& sys,
                                 std::map<std::string, std::map<int, double>> starts) {
  std::vector<std::vector<double>> x_start(inst.item_count(),
                                           std::vector<double>(inst.budget + 1, 0.0));
  std::vector<double> s1(inst.item_count(), 0.0);
  for (const auto& [id, slots] : starts) {
    const size_t i = inst.item_index(id);
    for (const auto& [t, x] : slots) {
      x_start[i][t] = x;
      s1[i] += x;
    }
  }
  return assemble_solution(sys, x_start, s1);
}

}  // namespace

TEST_CASE("dp on hand instances") {
  SUBCASE("single certain item") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 2}})}, 1, 2);
    inst.objective = additive_uniform(inst);
    CHECK(optimal_adaptive_dp(inst).value == doctest::Approx(2.0));
  }
  SUBCASE("uncapped copy beats the truncated one") {
    auto inst = expand_with_caps({{"A", {{{1, 0.5}, {2, 0.5}}}, {{{1, 1}, {2, 2}}}}}, 2, 2,
                                 nullptr);
    inst.objective = additive_uniform(inst);
    CHECK(optimal_adaptive_dp(inst).value == doctest::Approx(1.5));
  }
  SUBCASE("partition forbids taking both rivals") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 2}}, 1, "P"),
                             item("B", {{1, 1.0}}, {{1, 1}}, 1, "P")},
                            2, 2);
    inst.objective = additive_uniform(inst);
    CHECK(optimal_adaptive_dp(inst).value == doctest::Approx(2.0));
  }
  SUBCASE("guard rejects huge state spaces") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 2}})}, 1, 2);
    inst.objective = additive_uniform(inst);
    CHECK_THROWS(optimal_adaptive_dp(inst, 2));
  }
}

TEST_CASE("dp equals exhaustive enumeration on deterministic additive instances") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    RandomInstanceParams params;
    params.n_base = 1 + seed % 3;
    params.budget = 3 + static_cast<int>(seed % 4);
    params.reward_bound = 2;
    params.max_support = 1;  // deterministic sizes
    params.objective = ObjectiveKind::kAdditive;
    const auto inst = generate_random_instance(params, derive_seed(500, seed));
    const double dp = optimal_adaptive_dp(inst).value;
    const double brute = brute_force_deterministic_additive(inst);
    CHECK(dp == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("dp dominates the simulated policy") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    RandomInstanceParams params;
    params.n_base = 1 + seed % 2;
    params.budget = 3;
    params.reward_bound = 2;
    const auto inst = generate_random_instance(params, derive_seed(600, seed));
    const auto sys = ConstraintSystem::build(inst);
    std::vector<double> weights(inst.item_count(), 1.0);
    const auto sol = solve_weighted(sys, weights).scaled(0.5);
    const double opt = optimal_adaptive_dp(inst).value;
    const auto favg = simulate_favg(inst, sys, sol, 20000, seed);
    CHECK(opt >= favg.mean - 3.0 * favg.stderr_mean - 1e-9);
  }
}

TEST_CASE("simulate_favg matches hand cases and the enumeration oracle") {
  SUBCASE("zero solution") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 1}})}, 2, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {});
    const auto est = simulate_favg(inst, sys, sol, 200, 1);
    CHECK(est.mean == doctest::Approx(0.0));
    CHECK(est.stderr_mean == doctest::Approx(0.0));
  }
  SUBCASE("deterministic singleton") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 2}})}, 2, 2);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{1, 1.0}}}});
    const auto est = simulate_favg(inst, sys, sol, 200, 1);
    CHECK(est.mean == doctest::Approx(2.0));
    CHECK(est.stderr_mean == doctest::Approx(0.0));
  }
  SUBCASE("three-pair instance against exact enumeration") {
    auto inst = instance_of({item("A", {{2, 1.0}}, {{1, 0}, {2, 2}}),
                             item("B", {{1, 1.0}}, {{1, 1}}),
                             item("C", {{1, 1.0}}, {{1, 2}}, 1, "B")},
                            3, 2);
    // C shares B's partition
    inst = instance_of({item("A", {{2, 1.0}}, {{1, 0}, {2, 2}}),
                        item("B", {{1, 1.0}}, {{1, 1}}, 1, "Q"),
                        item("C", {{1, 1.0}}, {{1, 2}}, 1, "Q")},
                       3, 2);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(
        inst, sys, {{"A", {{1, 0.6}}}, {"B", {{2, 0.5}}}, {"C", {{2, 0.7}}}});
    const double exact = exact_favg_deterministic_sizes(inst, sys, sol);
    const auto est = simulate_favg(inst, sys, sol, 200000, 11);
    CHECK(std::abs(est.mean - exact) <= 3.0 * est.stderr_mean);
  }
  SUBCASE("threaded run reproduces the single-thread mean") {
    auto inst = generate_random_instance({2, 4, 2, 3, ObjectiveKind::kRotate}, 44);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = solve_weighted(sys, std::vector<double>(inst.item_count(), 1.0)).scaled(0.5);
    const auto a = simulate_favg(inst, sys, sol, 5000, 9, 1);
    const auto b = simulate_favg(inst, sys, sol, 5000, 9, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_mean == b.stderr_mean);
  }
}

TEST_CASE("conditional drop rates") {
  SUBCASE("a lone pair never drops") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 1}})}, 2, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{1, 0.8}}}});
    const auto stats = crs_drop_rate(inst, sys, sol, 5000, 3);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].sampled > 3500);
    CHECK(stats[0].dropped == 0);
  }
  SUBCASE("same-partition certain rivals drop half the time") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 1}}, 1, "P"),
                             item("B", {{1, 1.0}}, {{1, 1}}, 1, "P")},
                            1, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{1, 1.0}}}, {"B", {{1, 1.0}}}});
    const auto stats = crs_drop_rate(inst, sys, sol, 100000, 5);
    REQUIRE(stats.size() == 2);
    for (const auto& s : stats) {
      CHECK(s.sampled == 100000);
      CHECK(std::abs(s.rate() - 0.5) <= 3.0 * s.stderr_rate());
    }
  }
}

TEST_CASE("drop bound decomposition by blocker") {
  SUBCASE("silent blocker has zero rate and zero bound") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 1}}), item("B", {{1, 1.0}}, {{1, 1}})},
                            2, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{1, 0.9}}}});
    const auto dec =
        drop_bound_decomposition(inst, sys, sol, inst.item_index("A"), 1, 3000, 7);
    for (const auto& row : dec.blockers) {
      if (row.blocker == inst.item_index("B")) {
        CHECK(row.rate == 0.0);
        CHECK(row.bound == 0.0);
      }
    }
  }
  SUBCASE("symmetric same-partition tie meets its bound") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 1}}, 1, "P"),
                             item("B", {{1, 1.0}}, {{1, 1}}, 1, "P")},
                            1, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{1, 1.0}}}, {"B", {{1, 1.0}}}});
    const auto dec =
        drop_bound_decomposition(inst, sys, sol, inst.item_index("A"), 1, 100000, 9);
    REQUIRE(dec.sampled == 100000);
    for (const auto& row : dec.blockers) {
      if (row.blocker != inst.item_index("B")) continue;
      CHECK(row.same_partition);
      CHECK(row.bound == doctest::Approx(0.5));
      CHECK(std::abs(row.rate - 0.5) <= 3.0 * row.stderr_rate);
    }
  }
  SUBCASE("cross-partition coverage meets a tight bound") {
    // blocker J starts at t=1 with certain size 2, covering the probed
    // slot t=2; bound = mid mass = x_{J,1}
    auto inst = instance_of({item("I", {{1, 1.0}}, {{1, 1}}),
                             item("J", {{2, 1.0}}, {{1, 0}, {2, 1}})},
                            3, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"I", {{2, 0.5}}}, {"J", {{1, 0.6}}}});
    const auto dec =
        drop_bound_decomposition(inst, sys, sol, inst.item_index("I"), 2, 200000, 13);
    for (const auto& row : dec.blockers) {
      if (row.blocker != inst.item_index("J")) continue;
      CHECK(!row.same_partition);
      CHECK(row.mid_mass == doctest::Approx(0.6));
      CHECK(row.bound == doctest::Approx(0.6));
      CHECK(std::abs(row.rate - 0.6) <= 3.0 * row.stderr_rate + 1e-6);
      CHECK(row.rate <= row.bound + 3.0 * row.stderr_rate);
    }
  }
}

TEST_CASE("closed-form survival") {
  SUBCASE("no rivals reduces to the first-copy mass") {
    auto inst = instance_of({item("A", {{1, 0.5}, {2, 0.5}}, {{1, 1}, {2, 1}})}, 3, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{1, 0.3}, {2, 0.4}}}});
    const std::vector<int> profile = {1};
    // sum_t a_t = 0.3 + 0.4*(1-0.3)
    CHECK(survival_closed_form(sys, sol, profile, 0) == doctest::Approx(0.3 + 0.4 * 0.7));
  }
  SUBCASE("matches the exact enumeration oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
      auto inst = instance_of({item("A", {{1, 0.4}, {2, 0.6}}, {{1, 0}, {2, 1}}),
                               item("B", {{1, 0.3}, {3, 0.7}}, {{1, 0}, {3, 1}}, 3, "P"),
                               item("C", {{2, 1.0}}, {{1, 0}, {2, 1}}, 2, "P")},
                              4, 1);
      inst.objective = additive_uniform(inst);
      const auto sys = ConstraintSystem::build(inst);
      std::map<std::string, std::map<int, double>> starts;
      const char* ids[3] = {"A", "B", "C"};
      for (const char* id : ids) {
        const int t1 = 1 + static_cast<int>(rng.next_below(3));
        starts[id][t1] = 0.2 + 0.5 * rng.next_double();
        if (rng.next_double() < 0.5) {
          const int t2 = 1 + static_cast<int>(rng.next_below(3));
          if (t2 != t1) starts[id][t2] = 0.3 * rng.next_double();
        }
      }
      const auto sol = hand_solution(inst, sys, starts);
      std::vector<int> profile(3);
      profile[inst.item_index("A")] = 1 + static_cast<int>(rng.next_below(2));
      profile[inst.item_index("B")] = 1 + static_cast<int>(rng.next_below(3));
      profile[inst.item_index("C")] = 1 + static_cast<int>(rng.next_below(2));
      for (const char* id : ids) {
        const size_t probe = inst.item_index(id);
        const double closed = survival_closed_form(sys, sol, profile, probe);
        const double exact = exact_survival(inst, sys, sol, profile, probe);
        CHECK(closed == doctest::Approx(exact).epsilon(1e-10));
      }
    }
  }
  SUBCASE("monotone in the rival profile") {
    auto inst = instance_of({item("A", {{1, 1.0}}, {{1, 1}}),
                             item("B", {{1, 0.5}, {3, 0.5}}, {{1, 0}, {3, 1}})},
                            4, 1);
    inst.objective = additive_uniform(inst);
    const auto sys = ConstraintSystem::build(inst);
    const auto sol = hand_solution(inst, sys, {{"A", {{2, 0.5}}}, {"B", {{1, 0.6}}}});
    const size_t probe = inst.item_index("A");
    std::vector<int> small = {1, 1}, large = {1, 3};
    small[probe] = 1;
    large[probe] = 1;
    const double s_small = survival_closed_form(sys, sol, small, probe);
    const double s_large = survival_closed_form(sys, sol, large, probe);
    CHECK(s_small >= s_large);
    // and the Monte-Carlo probe agrees with the closed form
    const auto mc = survival_probe_mc(inst, sys, sol, large, probe, 200000, 3);
    CHECK(std::abs(mc.mean - s_large) <= 3.0 * mc.stderr_mean);
  }
}

TEST_CASE("end-to-end pipeline on a deterministic singleton") {
  auto inst = expand_with_caps({{"A", {{{1, 1.0}}}, {{{1, 2}}}}}, 1, 2, nullptr);
  inst.objective = additive_uniform(inst);
  GreedyConfig config;
  config.step = 0.1;
  config.exact_marginals = true;
  config.seed = 3;
  const auto report = end_to_end_ratio(inst, config, 50000, 17);
  REQUIRE(report.opt.has_value());
  CHECK(*report.opt == doctest::Approx(2.0));
  REQUIRE(report.ratio.has_value());
  CHECK(*report.ratio >= 0.1967);
  CHECK(*report.ratio == doctest::Approx(0.5).epsilon(0.05));
  CHECK(report.favg >= report.fbar / 2.0 - 3.0 * report.favg_stderr - 1e-9);
}

TEST_CASE("report csv shape") {
  std::ostringstream os;
  write_report_csv(os, {{"crs_drop", "inst-1", 0.43, 0.01, 0.5, true},
                        {"with, comma", "i\"q\"", 1.0, 0.0, 1.0, false}});
  const std::string text = os.str();
  CHECK(text.find("property,instance,estimate,stderr,threshold,verdict") == 0);
  CHECK(text.find("pass") != std::string::npos);
  CHECK(text.find("fail") != std::string::npos);
  CHECK(text.find("\"with, comma\"") != std::string::npos);
  CHECK(text.find("\"i\"\"q\"\"\"") != std::string::npos);
}
