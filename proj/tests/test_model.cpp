#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "stoknap/model.hpp"
#include "stoknap/rng.hpp"

using namespace stoknap;
using namespace stoknap::testing;

namespace {

BaseItem base(std::string id, std::map<int, double> sizes, std::map<int, int> rewards) {
  BaseItem b;
  b.id = std::move(id);
  b.sizes.support = std::move(sizes);
  b.rewards.values = std::move(rewards);
  return b;
}

}  // namespace

TEST_CASE("size cap piles tail mass onto the cap") {
  const BaseItem b = base("A", {{1, 0.5}, {3, 0.5}}, {{1, 1}, {3, 2}});

  SUBCASE("cap below max support") {
    const ExpandedItem e = apply_size_cap(b, 2);
    REQUIRE(e.sizes.support.size() == 2);
    CHECK(e.sizes.prob(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.sizes.prob(2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.cap == 2);
    CHECK(e.partition_id == "A");
  }
  SUBCASE("cap at max support leaves the distribution unchanged") {
    const ExpandedItem e = apply_size_cap(b, 3);
    REQUIRE(e.sizes.support.size() == 2);
    CHECK(e.sizes.prob(1) == doctest::Approx(0.5));
    CHECK(e.sizes.prob(3) == doctest::Approx(0.5));
  }
  SUBCASE("cap 1 collapses all mass") {
    const ExpandedItem e = apply_size_cap(base("B", {{2, 0.7}, {4, 0.3}}, {{2, 1}, {4, 1}}), 1);
    REQUIRE(e.sizes.support.size() == 1);
    CHECK(e.sizes.prob(1) == doctest::Approx(1.0));
  }
  SUBCASE("invalid cap rejected") { CHECK_THROWS(apply_size_cap(b, 0)); }
}

TEST_CASE("size cap preserves mass and is monotone in the cap") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<int, double> sizes;
    const int points = 1 + rng.next_below(4);
    double mass = 0.0;
    for (int k = 0; k < points; ++k) {
      const int s = 1 + rng.next_below(8);
      const double p = 0.1 + 0.8 * rng.next_double();
      sizes[s] += p;
      mass += p;
    }
    for (auto& [s, p] : sizes) p /= mass;
    std::map<int, int> rewards;
    int level = 0;
    for (int s = 1; s <= 8; ++s) {
      rewards[s] = level;
      if (rng.next_double() < 0.4) ++level;
    }
    const BaseItem b = base("X", sizes, rewards);

    const int cap_hi = 1 + rng.next_below(8);
    const int cap_lo = 1 + rng.next_below(cap_hi);
    const ExpandedItem hi = apply_size_cap(b, cap_hi);
    const ExpandedItem lo = apply_size_cap(b, cap_lo);

    CHECK(std::abs(hi.sizes.total_mass() - 1.0) <= 1e-12);
    CHECK(std::abs(lo.sizes.total_mass() - 1.0) <= 1e-12);

    // capping at cap_lo directly == capping the capped-at-cap_hi item
    BaseItem hi_as_base = base("X", hi.sizes.support, rewards);
    const ExpandedItem lo2 = apply_size_cap(hi_as_base, cap_lo);
    REQUIRE(lo2.sizes.support.size() == lo.sizes.support.size());
    for (const auto& [s, p] : lo.sizes.support)
      CHECK(lo2.sizes.prob(s) == doctest::Approx(p).epsilon(1e-12));

    // expected reward shrinks (weakly) as the cap shrinks
    double er_hi = 0.0, er_lo = 0.0;
    for (const auto& [s, p] : hi.sizes.support) er_hi += p * hi.rewards.reward_at(s);
    for (const auto& [s, p] : lo.sizes.support) er_lo += p * lo.rewards.reward_at(s);
    CHECK(er_lo <= er_hi + 1e-12);
  }
}

TEST_CASE("cap expansion enumerates every cap and shares partitions") {
  SUBCASE("counting") {
    auto inst = expand_with_caps({base("A", {{1, 1.0}}, {{1, 1}}),
                                  base("B", {{2, 1.0}}, {{1, 0}, {2, 1}})},
                                 3, 1, nullptr);
    CHECK(inst.item_count() == 6);
    CHECK(inst.matroid.partitions.size() == 2);
  }
  SUBCASE("single item single slot") {
    auto inst = expand_with_caps({base("A", {{4, 1.0}}, {{4, 1}})}, 1, 1, nullptr);
    REQUIRE(inst.item_count() == 1);
    CHECK(inst.items[0].sizes.prob(1) == doctest::Approx(1.0));
  }
  SUBCASE("deterministic size 2 across caps") {
    auto inst = expand_with_caps({base("A", {{2, 1.0}}, {{1, 0}, {2, 1}})}, 3, 1, nullptr);
    REQUIRE(inst.item_count() == 3);
    CHECK(inst.items[inst.item_index("A#01")].sizes.prob(1) == doctest::Approx(1.0));
    CHECK(inst.items[inst.item_index("A#02")].sizes.prob(2) == doctest::Approx(1.0));
    CHECK(inst.items[inst.item_index("A#03")].sizes.prob(2) == doctest::Approx(1.0));
  }
  SUBCASE("duplicate base ids rejected") {
    CHECK_THROWS(expand_with_caps({base("A", {{1, 1.0}}, {{1, 1}}),
                                   base("A", {{1, 1.0}}, {{1, 1}})},
                                  2, 1, nullptr));
  }
}

TEST_CASE("spot reduction builds per-instance partitions") {
  SpotInstance vm;
  vm.instance_id = "vm0";
  vm.cost_until_interruption.support = {{1, 0.3}, {5, 0.7}};
  SpotJobProfile j0{"j0", {{1, 0}, {2, 1}, {5, 2}}};
  SpotJobProfile j1{"j1", {{1, 1}, {5, 2}}};
  vm.jobs = {j0, j1};

  SUBCASE("counting") {
    auto inst = spot_reduce({vm}, 2, 2, nullptr);
    CHECK(inst.item_count() == 4);  // 2 jobs x 2 caps
    CHECK(inst.matroid.partitions.size() == 1);
    inst.objective = additive_uniform(inst);
    CHECK(validate_instance(inst).empty());
  }
  SUBCASE("interruption tail piles onto the cap") {
    auto inst = spot_reduce({vm}, 2, 2, nullptr);
    const auto& item = inst.items[inst.item_index("j0@vm0#02")];
    CHECK(item.sizes.prob(1) == doctest::Approx(0.3));
    CHECK(item.sizes.prob(2) == doctest::Approx(0.7));
  }
  SUBCASE("zero progress at size 1 is a valid curve") {
    auto inst = spot_reduce({vm}, 2, 2, nullptr);
    const auto& item = inst.items[inst.item_index("j0@vm0#02")];
    CHECK(item.rewards.reward_at(1) == 0);
  }
  SUBCASE("decreasing progress curve rejected") {
    SpotInstance bad = vm;
    bad.jobs[0].progress = {{1, 2}, {2, 1}};
    CHECK_THROWS(spot_reduce({bad}, 2, 2, nullptr));
  }
  SUBCASE("empty catalog rejected") { CHECK_THROWS(spot_reduce({}, 2, 2, nullptr)); }
}

TEST_CASE("reward distribution merges equal-reward sizes") {
  SUBCASE("injective curve") {
    const auto q = reward_distribution(item("A", {{1, 0.5}, {2, 0.5}}, {{1, 1}, {2, 2}}));
    CHECK(q.at(1) == doctest::Approx(0.5));
    CHECK(q.at(2) == doctest::Approx(0.5));
  }
  SUBCASE("merged levels") {
    const auto q = reward_distribution(item("A", {{1, 0.5}, {2, 0.5}}, {{1, 1}, {2, 1}}));
    REQUIRE(q.size() == 1);
    CHECK(q.at(1) == doctest::Approx(1.0));
  }
  SUBCASE("hand summation") {
    const auto q = reward_distribution(
        item("A", {{1, 0.2}, {2, 0.3}, {3, 0.5}}, {{1, 0}, {2, 1}, {3, 1}}));
    CHECK(q.at(0) == doctest::Approx(0.2));
    CHECK(q.at(1) == doctest::Approx(0.8));
  }
}

TEST_CASE("instance validation names the offender") {
  auto good = instance_of({item("A", {{1, 0.5}, {2, 0.5}}, {{1, 1}, {2, 2}})}, 2, 2);
  good.objective = additive_uniform(good);
  CHECK(validate_instance(good).empty());

  SUBCASE("decreasing reward curve") {
    auto bad = instance_of({item("A", {{1, 0.5}, {2, 0.5}}, {{1, 2}, {2, 1}})}, 2, 2);
    bad.objective = additive_uniform(bad);
    const auto violations = validate_instance(bad);
    REQUIRE(!violations.empty());
    bool found = false;
    for (const auto& v : violations)
      found |= v.subject == "A" && v.message.find("decreases") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("mass deficit reported with residual") {
    auto bad = instance_of({item("A", {{1, 0.5}, {2, 0.4}}, {{1, 1}, {2, 2}})}, 2, 2);
    bad.objective = additive_uniform(bad);
    const auto violations = validate_instance(bad);
    REQUIRE(!violations.empty());
    bool found = false;
    for (const auto& v : violations) found |= v.message.find("sum to") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("cap above budget") {
    auto bad = instance_of({item("A", {{3, 1.0}}, {{3, 1}})}, 2, 2);
    bad.objective = additive_uniform(bad);
    CHECK(!validate_instance(bad).empty());
  }
}

TEST_CASE("reward curve step extension") {
  RewardCurve c;
  c.values = {{2, 1}, {5, 3}};
  CHECK(c.reward_at(1) == 0);
  CHECK(c.reward_at(2) == 1);
  CHECK(c.reward_at(4) == 1);
  CHECK(c.reward_at(5) == 3);
  CHECK(c.reward_at(9) == 3);
}
