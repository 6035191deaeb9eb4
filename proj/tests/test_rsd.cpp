#include <gtest/gtest.h>

#include <set>

#include "lcmd/rsd.hpp"

using namespace lcmd;
using namespace lcmd::rsd;

TEST(Rsd, SingleAgentGetsTopChoice) {
  auto inst = HousingInstance::from_lists({{2, 0, 1}}, 0, 3);
  EXPECT_EQ(rsd_global(inst)[0], 2u);
  ProbeCounter c;
  EXPECT_EQ(rsd_local(inst, 0, c), 2u);
}

TEST(Rsd, EarlierAgentWinsSharedHouse) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = HousingInstance::from_lists({{0}, {0}}, seed);
    const std::uint32_t first = inst.before(0, 1) ? 0 : 1;
    auto got = rsd_global(inst);
    EXPECT_EQ(got[first], 0u);
    EXPECT_EQ(got[1 - first], kNoHouse);
  }
}

TEST(Rsd, RanksInRange) {
  auto inst = HousingInstance::seeded(1, 50, 3);
  const std::uint64_t top = 50ull * 50 * 50 * 50;
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    EXPECT_GE(inst.rank(i), 1u);
    EXPECT_LE(inst.rank(i), top);
  }
}

TEST(Rsd, HousesAssignedOnce) {
  auto inst = HousingInstance::seeded(3, 500, 3);
  std::set<std::uint32_t> used;
  for (auto h : rsd_global(inst)) {
    if (h != kNoHouse) {
      EXPECT_TRUE(used.insert(h).second);
    }
  }
}

TEST(Rsd, LocalMatchesGlobal) {
  for (std::uint64_t seed : {0u, 7u}) {
    auto inst = HousingInstance::seeded(seed, 500, 3);
    auto global = rsd_global(inst);
    for (std::uint32_t a = 0; a < inst.n(); ++a) {
      ProbeCounter c;
      EXPECT_EQ(rsd_local(inst, a, c), global[a]) << "agent " << a;
    }
    // reverse query order gives the same answers
    for (std::uint32_t a = inst.n(); a-- > 0;) {
      ProbeCounter c;
      EXPECT_EQ(rsd_local(inst, a, c), global[a]);
    }
  }
}

TEST(Rsd, FirstAgentIsCheap) {
  auto inst = HousingInstance::seeded(4, 300, 3);
  std::uint32_t first = 0;
  for (std::uint32_t a = 1; a < inst.n(); ++a) {
    if (inst.before(a, first)) first = a;
  }
  ProbeCounter c;
  EXPECT_EQ(rsd_local(inst, first, c), inst.oracle().forward(first)[0]);
  // own list plus one reverse list per listed house
  EXPECT_LE(c.probes(), inst.d() + 1);
}

TEST(Rsd, RejectsBadInput) {
  EXPECT_THROW(HousingInstance::from_lists({{1, 1}}, 0, 2), std::invalid_argument);
  EXPECT_THROW(HousingInstance::from_lists({{4}}, 0, 2), std::invalid_argument);
  auto inst = HousingInstance::from_lists({{0}});
  ProbeCounter c;
  EXPECT_THROW(rsd_local(inst, 3, c), std::invalid_argument);
}
