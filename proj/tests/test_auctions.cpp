#include <gtest/gtest.h>

#include <set>

#include "lcmd/auctions.hpp"
#include "lcmd/oracles.hpp"

using namespace lcmd;
using namespace lcmd::auctions;

namespace {

AuctionInstance seeded(Family f, std::uint64_t seed, std::uint32_t n, std::uint32_t m, std::uint32_t k) {
  InstanceSpec spec;
  spec.family = f;
  spec.seed = seed;
  spec.n = n;
  spec.m = m;
  spec.k_or_d = k;
  return AuctionInstance::seeded(spec);
}

std::vector<Rational> rats(std::initializer_list<int> xs) {
  std::vector<Rational> out;
  for (int x : xs) out.push_back(Rational(x));
  return out;
}

void expect_feasible(const AuctionInstance& inst, const Outcome& out) {
  std::set<std::uint32_t> used;
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    for (auto j : out.award[i]) EXPECT_TRUE(used.insert(j).second) << "item " << j << " awarded twice";
    if (!out.won(i)) {
      EXPECT_EQ(out.payment[i], 0);
    }
    EXPECT_GE(out.payment[i], 0);
    if (inst.mode() == AuctionMode::ksmb) {
      if (out.won(i)) {
        auto want = inst.set(i);
        std::sort(want.begin(), want.end());
        EXPECT_EQ(out.award[i], want);
      }
    } else if (out.won(i)) {
      ASSERT_EQ(out.award[i].size(), 1u);
      const auto& s = inst.set(i);
      EXPECT_NE(std::find(s.begin(), s.end(), out.award[i][0]), s.end());
    }
  }
}

std::int64_t tenths(const Rational& r) { return static_cast<std::int64_t>(to_double(r * 10) + 0.5); }

}  // namespace

// ---- UDUV ----

TEST(Uduv, SingleBuyerPaysHalf) {
  auto inst = AuctionInstance::from_sets(AuctionMode::uduv, 1, {{0}});
  auto out = uduv_run(inst);
  EXPECT_EQ(out.award[0], std::vector<std::uint32_t>{0});
  EXPECT_EQ(out.payment[0], make_rational(1, 2));
  EXPECT_EQ(utility(inst, out, 0), make_rational(1, 2));
}

TEST(Uduv, TieGoesToSmallerId) {
  auto inst = AuctionInstance::from_sets(AuctionMode::uduv, 1, {{0}, {0}});
  auto out = uduv_run(inst);
  EXPECT_TRUE(out.won(0));
  EXPECT_FALSE(out.won(1));
  EXPECT_EQ(out.payment[1], 0);
}

TEST(Uduv, RejectsBids) {
  auto inst = AuctionInstance::from_sets(AuctionMode::uduv, 1, {{0}});
  ReportOverlay o;
  o.bids[0] = 3;
  EXPECT_THROW(uduv_run(inst, o), std::invalid_argument);
  EXPECT_THROW(udubv_run(inst), std::invalid_argument);
}

TEST(Uduv, HalfOfMaximumMatching) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto inst = seeded(Family::uduv, seed, 200, 200, 3);
    auto out = uduv_run(inst);
    expect_feasible(inst, out);
    std::size_t winners = 0;
    for (std::uint32_t i = 0; i < inst.n(); ++i) winners += out.won(i);
    const auto best = oracles::max_matching(inst.sets(), inst.m());
    EXPECT_GE(2 * winners, best) << "seed " << seed;
  }
}

TEST(Uduv, LocalStitchesToGlobal) {
  auto inst = seeded(Family::uduv, 11, 300, 300, 3);
  auto out = uduv_run(inst);
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    ProbeCounter c;
    auto ans = uduv_local_buyer(inst, i, c);
    EXPECT_EQ(ans.award, out.award[i]) << "buyer " << i;
    EXPECT_EQ(ans.payment, out.payment[i]);
  }
  std::vector<std::uint32_t> holder(inst.m(), kNoBuyer);
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    for (auto j : out.award[i]) holder[j] = i;
  }
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    ProbeCounter c;
    EXPECT_EQ(uduv_local_item(inst, j, c), holder[j]) << "item " << j;
  }
}

TEST(Uduv, IsolatedBuyerIsCheap) {
  auto inst = AuctionInstance::from_sets(AuctionMode::uduv, 6, {{0, 1}, {2, 3}, {4}});
  ProbeCounter c;
  auto ans = uduv_local_buyer(inst, 0, c);
  EXPECT_EQ(ans.award.size(), 1u);
  // own list plus one reverse list per item
  EXPECT_LE(c.probes(), inst.k() + 1);
}

TEST(Uduv, LocalHonoursOverlay) {
  auto inst = AuctionInstance::from_sets(AuctionMode::uduv, 2, {{0}, {0, 1}});
  ReportOverlay o;
  o.sets[0] = {1};
  ProbeCounter c;
  auto ans = uduv_local_buyer(inst, o, 0, c);
  EXPECT_EQ(ans.award, uduv_run(inst, o).award[0]);
}

TEST(Uduv, AuditFindsNothingOnSmallInstances) {
  std::size_t audited = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::uint32_t n = 1 + seed % 8, m = 1 + (seed / 8) % 8, k = std::min<std::uint32_t>(m, 1 + seed % 2);
    auto inst = seeded(Family::uduv, seed, n, m, k);
    auto v = truthfulness_audit(inst, mechanism_for(AuctionMode::uduv), DeviationGrid::standard(AuctionMode::uduv));
    EXPECT_TRUE(v.empty()) << "seed " << seed << " buyer " << v.front().buyer << " " << v.front().deviation;
    ++audited;
  }
  EXPECT_EQ(audited, 40u);
}

// ---- UDUBV ----

TEST(Udubv, HigherBidPaysRunnerUp) {
  auto inst = AuctionInstance::from_sets(AuctionMode::udubv, 1, {{0}, {0}}, rats({5, 3}));
  auto out = udubv_run(inst);
  EXPECT_TRUE(out.won(0));
  EXPECT_FALSE(out.won(1));
  EXPECT_EQ(out.payment[0], 3);
  EXPECT_EQ(out.payment[1], 0);
}

TEST(Udubv, SingleBuyerPaysZero) {
  auto inst = AuctionInstance::from_sets(AuctionMode::udubv, 2, {{0, 1}}, rats({7}));
  auto out = udubv_run(inst);
  EXPECT_EQ(out.award[0], std::vector<std::uint32_t>{0});
  EXPECT_EQ(out.payment[0], 0);
}

TEST(Udubv, EqualBidsGoToSmallerId) {
  auto inst = AuctionInstance::from_sets(AuctionMode::udubv, 1, {{0}, {0}}, rats({4, 4}));
  auto out = udubv_run(inst);
  EXPECT_TRUE(out.won(0));
  EXPECT_EQ(out.payment[0], 4);
}

TEST(Udubv, SetOverlayRejected) {
  auto inst = AuctionInstance::from_sets(AuctionMode::udubv, 2, {{0}, {1}}, rats({1, 1}));
  ReportOverlay o;
  o.sets[0] = {1};
  EXPECT_THROW(udubv_run(inst, o), std::invalid_argument);
  o.sets[0] = {0};  // unchanged set is fine
  EXPECT_NO_THROW(udubv_run(inst, o));
}

TEST(Udubv, ShadowPaymentOfLoser) {
  auto inst = AuctionInstance::from_sets(AuctionMode::udubv, 1, {{0}, {0}}, rats({5, 3}));
  EXPECT_EQ(shadow_payment(inst, 1), 5);
  EXPECT_EQ(udubv_run(inst).payment[1], 0);
}

TEST(Udubv, HalfOfMaximumWeightMatching) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = seeded(Family::udubv, seed, 100, 100, 3);
    auto out = udubv_run(inst);
    expect_feasible(inst, out);
    std::vector<oracles::WeightedEdge<std::int64_t>> edges;
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      for (auto j : inst.set(i)) edges.push_back({i, j, tenths(inst.value(i))});
    }
    const auto best = oracles::max_weight_matching<std::int64_t>(inst.n(), inst.m(), edges);
    EXPECT_GE(2 * tenths(welfare_by_bids(inst, out)), best) << "seed " << seed;
  }
}

TEST(Udubv, LocalStitchesToGlobal) {
  auto inst = seeded(Family::udubv, 5, 300, 300, 3);
  auto out = udubv_run(inst);
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    ProbeCounter c;
    auto ans = udubv_local(inst, i, c);
    EXPECT_EQ(ans.award, out.award[i]) << "buyer " << i;
    EXPECT_EQ(ans.payment, out.payment[i]) << "buyer " << i;
  }
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    std::uint32_t holder = kNoBuyer;
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      if (!out.award[i].empty() && out.award[i][0] == j) holder = i;
    }
    ProbeCounter c;
    EXPECT_EQ(bid_greedy_local_item(inst, j, c), holder);
  }
}

// ---- kSMB ----

TEST(Ksmb, ThreeBuyerExample) {
  // A:{1,2}@10, B:{2,3}@6, C:{3}@4 with items renumbered from 0
  auto inst = AuctionInstance::from_sets(AuctionMode::ksmb, 3, {{0, 1}, {1, 2}, {2}}, rats({10, 6, 4}));
  auto out = ksmb_run(inst);
  EXPECT_TRUE(out.won(0));
  EXPECT_EQ(out.payment[0], 6);
  EXPECT_FALSE(out.won(1));
  EXPECT_EQ(out.payment[1], 0);
  EXPECT_TRUE(out.won(2));
  EXPECT_EQ(out.payment[2], 0);
}

TEST(Ksmb, DisjointSetsAllWinForFree) {
  auto inst = AuctionInstance::from_sets(AuctionMode::ksmb, 6, {{0, 1}, {2, 3}, {4, 5}}, rats({1, 2, 3}));
  auto out = ksmb_run(inst);
  for (std::uint32_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(out.won(i));
    EXPECT_EQ(out.payment[i], 0);
  }
}

TEST(Ksmb, SetOverlayRejected) {
  auto inst = AuctionInstance::from_sets(AuctionMode::ksmb, 2, {{0}, {1}}, rats({1, 1}));
  ReportOverlay o;
  o.sets[1] = {0, 1};
  EXPECT_THROW(ksmb_run(inst, o), std::invalid_argument);
}

TEST(Ksmb, KApproximationOfPacking) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::uint32_t n = 1 + seed % 20, m = 4 + seed % 9, k = 1 + seed % 3;
    auto inst = seeded(Family::ksmb, seed, n, m, k);
    auto out = ksmb_run(inst);
    expect_feasible(inst, out);
    const auto best = oracles::optimal_packing(inst.sets(), inst.values());
    EXPECT_GE(k * welfare_by_bids(inst, out), best) << "seed " << seed;
  }
}

TEST(Ksmb, LargeInstanceFeasibleAndLocal) {
  auto inst = seeded(Family::ksmb, 9, 300, 300, 3);
  auto out = ksmb_run(inst);
  expect_feasible(inst, out);
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    ProbeCounter c;
    auto ans = ksmb_local(inst, i, c);
    EXPECT_EQ(ans.award, out.award[i]) << "buyer " << i;
    EXPECT_EQ(ans.payment, out.payment[i]) << "buyer " << i;
  }
}

TEST(Ksmb, IsolatedBuyerIsCheap) {
  auto inst = AuctionInstance::from_sets(AuctionMode::ksmb, 5, {{0, 1}, {2, 3}, {3, 4}}, rats({1, 5, 2}));
  ProbeCounter c;
  auto ans = ksmb_local(inst, 0, c);
  EXPECT_FALSE(ans.award.empty());
  EXPECT_EQ(ans.payment, 0);
  EXPECT_LE(c.probes(), inst.k() + 1);
}

// ---- properties shared by the bid modes ----

class BidModes : public ::testing::TestWithParam<Family> {};

TEST_P(BidModes, PaymentIsCriticalBid) {
  const Rational eps = make_rational(1, 1000);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = seeded(GetParam(), seed, 12, 10, 2);
    auto out = mechanism_for(inst.mode())(inst, {});
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      if (!out.won(i)) continue;
      ReportOverlay up, down;
      up.bids[i] = out.payment[i] + eps;
      EXPECT_TRUE(mechanism_for(inst.mode())(inst, up).won(i)) << "seed " << seed << " buyer " << i;
      if (out.payment[i] >= eps) {
        down.bids[i] = out.payment[i] - eps;
        EXPECT_FALSE(mechanism_for(inst.mode())(inst, down).won(i)) << "seed " << seed << " buyer " << i;
      }
    }
  }
}

TEST_P(BidModes, AuditFindsNothing) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = seeded(GetParam(), seed, 1 + seed % 5, 2 + seed % 7, 1 + seed % 2);
    auto v = truthfulness_audit(inst, mechanism_for(inst.mode()), DeviationGrid::standard(inst.mode()));
    EXPECT_TRUE(v.empty()) << "seed " << seed;
  }
}

TEST_P(BidModes, ZeroPaymentBugIsCaught) {
  auto inst = AuctionInstance::from_sets(GetParam() == Family::ksmb ? AuctionMode::ksmb : AuctionMode::udubv, 1,
                                         {{0}, {0}}, rats({5, 3}));
  auto honest = mechanism_for(inst.mode());
  Mechanism broken = [&](const AuctionInstance& i, const ReportOverlay& o) {
    auto out = honest(i, o);
    std::fill(out.payment.begin(), out.payment.end(), Rational(0));
    return out;
  };
  EXPECT_FALSE(truthfulness_audit(inst, broken, DeviationGrid::standard(inst.mode())).empty());
}

TEST_P(BidModes, VoluntaryParticipation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = seeded(GetParam(), seed, 50, 40, 3);
    auto out = mechanism_for(inst.mode())(inst, {});
    for (std::uint32_t i = 0; i < inst.n(); ++i) EXPECT_GE(utility(inst, out, i), 0);
  }
}

INSTANTIATE_TEST_SUITE_P(Auctions, BidModes, ::testing::Values(Family::udubv, Family::ksmb),
                         [](const auto& info) { return std::string(family_name(info.param)); });

TEST(Audit, EmptyGridReportsNothing) {
  auto inst = AuctionInstance::from_sets(AuctionMode::udubv, 1, {{0}, {0}}, rats({5, 3}));
  Mechanism broken = [](const AuctionInstance& i, const ReportOverlay&) {
    return Outcome{std::vector<std::vector<std::uint32_t>>(i.n()), std::vector<Rational>(i.n(), 0)};
  };
  EXPECT_TRUE(truthfulness_audit(inst, broken, DeviationGrid::none()).empty());
}

TEST(AuctionInstance, RejectsBadInput) {
  EXPECT_THROW(AuctionInstance::from_sets(AuctionMode::ksmb, 2, {{0, 0}}, rats({1})), std::invalid_argument);
  EXPECT_THROW(AuctionInstance::from_sets(AuctionMode::ksmb, 2, {{5}}, rats({1})), std::invalid_argument);
  EXPECT_THROW(AuctionInstance::from_sets(AuctionMode::ksmb, 2, {{0}}, rats({-1})), std::invalid_argument);
  EXPECT_THROW(AuctionInstance::from_sets(AuctionMode::ksmb, 2, {{0}}, rats({1, 2})), std::invalid_argument);
  InstanceSpec spec;
  spec.family = Family::matching;
  EXPECT_THROW(AuctionInstance::seeded(spec), std::invalid_argument);
}
