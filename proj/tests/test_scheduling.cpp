#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcmd/scheduling.hpp"

using namespace lcmd;
using namespace lcmd::scheduling;

namespace {

// Machines A, B, C, D -> 0, 1, 2, 3.
std::vector<std::vector<std::uint32_t>> script(std::initializer_list<std::pair<const char*, int>> parts) {
  std::vector<std::vector<std::uint32_t>> out;
  for (auto [pair, times] : parts) {
    for (int t = 0; t < times; ++t) {
      out.push_back({static_cast<std::uint32_t>(pair[0] - 'A'), static_cast<std::uint32_t>(pair[1] - 'A')});
    }
  }
  return out;
}

SchedulingInstance random_restricted(std::uint64_t seed, std::uint32_t max_n, std::uint32_t max_m, std::int64_t max_bid) {
  RandomTape tape(seed);
  const auto n = 1 + static_cast<std::uint32_t>(tape.uniform({"t-n", 0, 0}, max_n));
  const auto m = 1 + static_cast<std::uint32_t>(tape.uniform({"t-m", 0, 0}, max_m));
  std::vector<std::int64_t> bids(n);
  for (std::uint32_t i = 0; i < n; ++i) bids[i] = 1 + static_cast<std::int64_t>(tape.uniform({"t-b", i, 0}, max_bid));
  std::vector<std::vector<std::uint32_t>> sets(m);
  for (std::uint32_t j = 0; j < m; ++j) {
    for (std::uint64_t c = 0; c < 2; ++c) sets[j].push_back(static_cast<std::uint32_t>(tape.uniform({"t-s", j, c}, n)));
  }
  std::vector<std::uint32_t> pi(n);
  std::iota(pi.begin(), pi.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i) std::swap(pi[i - 1], pi[tape.uniform({"t-pi", i, 0}, i)]);
  return SchedulingInstance::restricted(bids, sets, pi, seed, 2);
}

}  // namespace

TEST(Slms, SingleMachineTakesAll) {
  auto inst = SchedulingInstance::standard({5}, 7, 2, 1);
  EXPECT_EQ(slms_online(inst).heights, std::vector<std::int64_t>{7});
}

TEST(Slms, EqualCapacitiesSplitEvenly) {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = SchedulingInstance::standard({1, 1}, 100000, 2, seed);
    total += static_cast<double>(slms_online(inst).heights[0]);
  }
  EXPECT_NEAR(total / 100, 50000, 3 * std::sqrt(25000.0));
}

TEST(Slms, HeightShareFollowsCapacityShare) {
  auto inst = SchedulingInstance::standard({2, 3}, 100000, 2, 4);
  EXPECT_NEAR(static_cast<double>(slms_online(inst).heights[0]) / 100000, 2.0 / 5.0, 0.01);
}

TEST(Slms, FeasibleAndDeterministic) {
  auto inst = SchedulingInstance::seeded({.seed = 3, .n = 64, .m = 300, .k_or_d = 2, .family = Family::scheduling_std});
  auto a = slms_online(inst);
  EXPECT_EQ(a.placed(), 300);
  EXPECT_EQ(a.assign, slms_online(inst).assign);
  for (std::uint32_t j = 0; j < 300; ++j) {
    auto ch = inst.machine_choices(j);
    EXPECT_NE(std::find(ch.begin(), ch.end(), a.assign[j]), ch.end());
  }
}

TEST(Slms, LocalMatchesRankOrderReplay) {
  auto inst = SchedulingInstance::seeded({.seed = 8, .n = 512, .m = 512, .k_or_d = 2, .family = Family::scheduling_std});
  const auto order = arrival_order(inst);
  const auto global = slms_online(inst, order);
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    ProbeCounter c;
    ASSERT_EQ(slms_local(inst, j, c), global.assign[j]) << "job " << j;
  }
}

TEST(Slms, LocalSingleJobTakesFirstChoiceWhenEmpty) {
  auto inst = SchedulingInstance::standard({3, 4}, 1, 2, 9);
  ProbeCounter c;
  EXPECT_EQ(slms_local(inst, 0, c), slms_online(inst).assign[0]);
  EXPECT_THROW(slms_local(inst, 1, c), std::invalid_argument);
}

TEST(ExpectedHeight, Values) {
  EXPECT_EQ(expected_height(0, 5, 10), Rational(0));
  EXPECT_EQ(expected_height(2, 3, 10), Rational(4));
  EXPECT_THROW(expected_height(0, 0, 10), std::invalid_argument);
}

TEST(ExpectedHeight, NondecreasingInOwnBid) {
  for (std::int64_t bm = 0; bm <= 20; ++bm) {
    for (std::int64_t m : {1, 7, 100}) {
      Rational prev = 0;
      for (std::int64_t b = bm == 0 ? 1 : 0; b <= 20; ++b) {
        auto h = expected_height(b, bm, m);
        EXPECT_GE(h, prev);
        prev = h;
      }
    }
  }
}

TEST(SlmsPayment, ClosedFormExample) {
  auto inst = SchedulingInstance::standard({1, 1}, 2, 2, 0);
  EXPECT_EQ(payment_slms_expected(inst, 0).payment, Rational(2));
  EXPECT_EQ(slms_expected_payment(0, 5, 10), Rational(0));
}

TEST(SlmsPayment, SampledAverageEqualsClosedForm) {
  for (auto bids : {std::vector<std::int64_t>{4, 6}, std::vector<std::int64_t>{1, 1}, std::vector<std::int64_t>{5, 2, 3}}) {
    auto inst = SchedulingInstance::standard(bids, 12, 2, 0);
    for (std::uint32_t i = 0; i < bids.size(); ++i) {
      Rational sum = 0;
      for (std::int64_t k = 1; k <= bids[i]; ++k) {
        auto p = payment_slms_sampled(inst, i, k).payment;
        EXPECT_GE(p, 0);
        sum += p;
      }
      EXPECT_EQ(sum / bids[i], payment_slms_expected(inst, i).payment);
    }
  }
}

TEST(SlmsPayment, SampledTermAverage) {
  // b = (4, 6): mean over k of m*4*k/(6+k) is m * sum k/(6+k).
  const std::int64_t m = 12;
  Rational mean = 0, direct = 0;
  for (std::int64_t k = 1; k <= 4; ++k) {
    mean += make_rational(m * 4 * k, 6 + k);
    direct += make_rational(m * k, 6 + k);
  }
  EXPECT_EQ(mean / 4, direct);
}

TEST(SlmsPayment, UnitBidHasOneDraw) {
  auto inst = SchedulingInstance::standard({1, 3}, 10, 2, 0);
  for (std::uint64_t draw = 0; draw < 5; ++draw) {
    EXPECT_EQ(payment_slms_sampled_draw(inst, 0, draw).payment, payment_slms_sampled(inst, 0, 1).payment);
  }
  EXPECT_THROW(payment_slms_sampled(inst, 0, 2), std::invalid_argument);
}

TEST(SlmsPayment, ExpectedUtilityPeaksAtTruth) {
  const std::int64_t truth = 2, others = 3, m = 12;
  auto util = [&](std::int64_t x) {
    const auto p = slms_expected_payment(x, others, m);
    return p - expected_height(x, others, m) * x * x / truth;
  };
  for (std::int64_t x = 1; x <= 6; ++x) EXPECT_LE(util(x), util(truth)) << "bid " << x;
}

// Without the bid factor in the cost, overbidding pays.
TEST(SlmsPayment, LoadOnlyCostRewardsOverbidding) {
  const std::int64_t truth = 2, others = 3, m = 12;
  auto util = [&](std::int64_t x) {
    return slms_expected_payment(x, others, m) - expected_height(x, others, m) / truth;
  };
  EXPECT_GT(util(6), util(truth));
}

TEST(Rlms, SingleMachineTakesAll) {
  auto inst = SchedulingInstance::restricted({3}, std::vector<std::vector<std::uint32_t>>(9, {0}));
  EXPECT_EQ(rlms_online(inst).heights, std::vector<std::int64_t>{9});
}

TEST(Rlms, EmptyChoiceSetRejected) {
  auto inst = SchedulingInstance::restricted({3}, {{}});
  EXPECT_THROW(rlms_online(inst), std::invalid_argument);
}

TEST(Rlms, FlooredRuleOnThreeMachineScript) {
  // Starting heights (1,3,18) on capacities (4,8,36), jobs AB, BC, AB.
  const std::vector<std::int64_t> start{1, 3, 18};
  auto inst = SchedulingInstance::restricted({4, 8, 36}, script({{"AB", 1}, {"BC", 1}, {"AB", 1}}));
  EXPECT_EQ(rlms_online(inst, {}, start).heights, (std::vector<std::int64_t>{3, 4, 18}));
  EXPECT_EQ(rlms_online(inst.with_bid(1, 9), {}, start).heights, (std::vector<std::int64_t>{3, 4, 18}));
}

TEST(Rlms, ZeroBidMachineNeverChosen) {
  auto inst = SchedulingInstance::restricted({2, 2}, {{0, 1}, {0, 1}, {0}});
  auto a = rlms_online(inst.with_bid(0, 0));
  EXPECT_EQ(a.heights[0], 0);
  EXPECT_EQ(a.assign[2], kUnassigned);
}

TEST(Rlms, LocalMatchesRankOrderReplay) {
  auto inst = SchedulingInstance::seeded({.seed = 8, .n = 512, .m = 512, .k_or_d = 2, .family = Family::scheduling_res});
  const auto order = arrival_order(inst);
  const auto global = rlms_online(inst, order);
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    ProbeCounter c;
    ASSERT_EQ(rlms_local(inst, j, c), global.assign[j]) << "job " << j;
  }
}

TEST(Rlms, LocalSingleJobUsesPermutation) {
  auto inst = SchedulingInstance::restricted({2, 2, 2}, {{0, 2}}, {2, 1, 0});
  ProbeCounter c;
  EXPECT_EQ(rlms_local(inst, 0, c), 2u);
}

TEST(Greedy, FourMachineRegression) {
  auto low = SchedulingInstance::restricted({4, 4, 8, 1}, script({{"AD", 2}, {"BD", 2}, {"CD", 6}, {"AB", 1}, {"AC", 1}}));
  EXPECT_EQ(greedy_unmodified(low).heights, (std::vector<std::int64_t>{3, 2, 7, 0}));
  auto high = SchedulingInstance::restricted({4, 4, 9, 1}, script({{"AD", 2}, {"BD", 2}, {"CD", 6}, {"BC", 1}, {"AC", 1}}));
  EXPECT_EQ(greedy_unmodified(high).heights, (std::vector<std::int64_t>{3, 3, 6, 0}));
  auto trace = monotonicity_trace(low, high, Allocator::greedy);
  EXPECT_GT(trace_violations(trace, 2), 0u);
  EXPECT_LT(trace.back()[2], 0);
}

TEST(Greedy, ThreeMachineRegression) {
  const std::vector<std::int64_t> start{1, 3, 18};
  auto inst = SchedulingInstance::restricted({4, 8, 36}, script({{"AB", 1}, {"BC", 1}, {"AB", 1}}));
  EXPECT_EQ(greedy_unmodified(inst, start).heights, (std::vector<std::int64_t>{2, 5, 18}));
  EXPECT_EQ(greedy_unmodified(inst.with_bid(1, 9), start).heights, (std::vector<std::int64_t>{2, 4, 19}));
}

TEST(Greedy, SingleMachineTakesAll) {
  auto inst = SchedulingInstance::restricted({2}, std::vector<std::vector<std::uint32_t>>(5, {0}));
  EXPECT_EQ(greedy_unmodified(inst).heights, std::vector<std::int64_t>{5});
}

TEST(RlmsPayment, UnlistedMachinePaysNothing) {
  auto inst = SchedulingInstance::restricted({3, 2, 5}, {{0, 1}, {1, 0}});
  EXPECT_EQ(payment_rlms(inst, 2).payment, Rational(0));
}

TEST(RlmsPayment, TwoMachineHandRerun) {
  auto inst = SchedulingInstance::restricted({1, 1}, {{0, 1}});
  EXPECT_EQ(rlms_online(inst).assign[0], 0u);
  EXPECT_EQ(payment_rlms(inst, 0).payment, Rational(2));
}

TEST(RlmsPayment, VoluntaryParticipation) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = SchedulingInstance::seeded({.seed = seed, .n = 12, .m = 40, .k_or_d = 2, .family = Family::scheduling_res});
    auto alloc = rlms_online(inst);
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      const auto p = payment_rlms(inst, i).payment;
      const auto b = inst.bids()[i];
      EXPECT_GE(p - alloc.load(i) * b, 0);
      EXPECT_GE(machine_utility(p, alloc.heights[i], b, b), 0);
    }
  }
}

TEST(RlmsPayment, NoProfitableDeviationOnSmallInstances) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto inst = random_restricted(seed, 5, 20, 6);
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      const auto c = inst.bids()[i];
      const auto truthful = machine_utility(payment_rlms(inst, i).payment, rlms_online(inst).heights[i], c, c);
      for (std::int64_t x = 0; x <= 2 * c; ++x) {
        auto dev = inst.with_bid(i, x);
        const auto u = machine_utility(payment_rlms(dev, i).payment, rlms_online(dev).heights[i], x, c);
        EXPECT_LE(u, truthful) << "seed " << seed << " machine " << i << " bid " << x;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Monotonicity, EqualBidsGiveZeroTrace) {
  auto inst = random_restricted(4, 6, 30, 6);
  for (const auto& row : monotonicity_trace(inst, 0, inst.bids()[0], inst.bids()[0])) {
    for (auto v : row) EXPECT_EQ(v, 0);
  }
}

TEST(Monotonicity, FlooredRuleOnRandomScripts) {
  std::size_t violations = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto inst = random_restricted(1000 + seed, 8, 40, 6);
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      for (std::int64_t b = 1; b <= 6; ++b) {
        for (std::int64_t bp = b + 1; bp <= 6; ++bp) violations += trace_violations(monotonicity_trace(inst, i, b, bp), i);
      }
    }
  }
  EXPECT_EQ(violations, 0u);
}

TEST(Makespan, SingleMachineRatioOne) {
  auto inst = SchedulingInstance::restricted({3}, std::vector<std::vector<std::uint32_t>>(7, {0}));
  EXPECT_EQ(makespan_ratio(inst), Rational(1));
}

TEST(Makespan, UniformTwoChoiceMaxLoad) {
  const std::uint32_t n = 1024;
  const double bound = 1 + 2 * std::log(std::log(double(n))) / std::log(2.0) + 4;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = SchedulingInstance::restricted(
        std::vector<std::int64_t>(n, 1),
        build_instance({.seed = seed, .n = n, .m = n, .k_or_d = 2, .family = Family::scheduling_res},
                       std::vector<std::int64_t>(n, 1))
            .forward_lists());
    auto h = rlms_online(inst).heights;
    EXPECT_LE(static_cast<double>(*std::max_element(h.begin(), h.end())), bound) << "seed " << seed;
  }
}

TEST(Makespan, RatioAtLeastOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = SchedulingInstance::seeded({.seed = seed, .n = 64, .m = 200, .k_or_d = 2, .family = Family::scheduling_res});
    EXPECT_GE(makespan_ratio(inst), 1);
  }
}

TEST(SchedulingInstance, RejectsBadInput) {
  EXPECT_THROW(SchedulingInstance::restricted({0, 1}, {{0}}), std::invalid_argument);
  EXPECT_THROW(SchedulingInstance::restricted({1, 1}, {{0, 1}}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(SchedulingInstance::restricted({1, 1}, {{0, 1, 1}}, {}, 0, 2), std::invalid_argument);
  EXPECT_THROW(SchedulingInstance::restricted({1}, {{3}}), std::invalid_argument);
}
