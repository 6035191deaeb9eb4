#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>

#include "lcmd/oracles.hpp"

using namespace lcmd;
using namespace lcmd::oracles;

namespace {

std::vector<std::int64_t> random_vector(const RandomTape& tape, std::uint64_t id, std::size_t len, std::uint64_t top) {
  std::vector<std::int64_t> v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = static_cast<std::int64_t>(tape.uniform({"v", id, i}, top));
  return v;
}

// Every injective partial assignment, by recursion over left vertices.
std::size_t brute_matching(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t right) {
  std::vector<char> used(right, 0);
  std::function<std::size_t(std::size_t)> go = [&](std::size_t l) -> std::size_t {
    if (l == adj.size()) return 0;
    std::size_t best = go(l + 1);
    for (auto r : adj[l]) {
      if (used[r]) continue;
      used[r] = 1;
      best = std::max(best, 1 + go(l + 1));
      used[r] = 0;
    }
    return best;
  };
  return go(0);
}

Rational brute_weight(std::uint32_t left, std::uint32_t right, const std::vector<WeightedEdge<Rational>>& edges) {
  std::vector<std::vector<std::pair<std::uint32_t, Rational>>> adj(left);
  for (const auto& e : edges) adj[e.left].emplace_back(e.right, e.weight);
  std::vector<char> used(right, 0);
  std::function<Rational(std::size_t)> go = [&](std::size_t l) -> Rational {
    if (l == left) return 0;
    Rational best = go(l + 1);
    for (const auto& [r, w] : adj[l]) {
      if (used[r]) continue;
      used[r] = 1;
      best = std::max(best, w + go(l + 1));
      used[r] = 0;
    }
    return best;
  };
  return go(0);
}

}  // namespace

TEST(Majorizes, Basics) {
  EXPECT_TRUE(majorizes<std::int64_t>({2, 5, 1}, {5, 1, 2}));
  EXPECT_TRUE(majorizes<std::int64_t>({3, 1}, {2, 2}));
  EXPECT_FALSE(majorizes<std::int64_t>({2, 2}, {3, 1}));
  EXPECT_TRUE(majorizes<std::int64_t>({}, {1}));
}

TEST(Majorizes, DoesNotTouchInputs) {
  const std::vector<std::int64_t> p{1, 3, 2}, q{2, 2, 2};
  auto pc = p, qc = q;
  (void)majorizes(pc, qc);
  EXPECT_EQ(pc, p);
  EXPECT_EQ(qc, q);
}

TEST(Majorizes, ReflexiveAndTransitive) {
  RandomTape tape(3);
  for (std::uint64_t t = 0; t < 2000; ++t) {
    auto a = random_vector(tape, 3 * t, 5, 6);
    auto b = random_vector(tape, 3 * t + 1, 5, 6);
    auto c = random_vector(tape, 3 * t + 2, 5, 6);
    EXPECT_TRUE(majorizes(a, a));
    if (majorizes(a, b) && majorizes(b, c)) { EXPECT_TRUE(majorizes(a, c)); }
  }
}

TEST(MajorizationStep, UnitCase) { EXPECT_TRUE(majorization_step_check({1, 1}, {1, 1}, 1, 1)); }

TEST(MajorizationStep, RandomPairsHold) {
  RandomTape tape(17);
  std::size_t checked = 0;
  for (std::uint64_t t = 0; checked < 100000; ++t) {
    const std::size_t len = 1 + tape.uniform({"len", t, 0}, 6);
    auto p = random_vector(tape, 2 * t, len, 5);
    auto q = random_vector(tape, 2 * t + 1, len, 5);
    // Same total keeps the pair comparable more often.
    const auto sp = std::accumulate(p.begin(), p.end(), std::int64_t{0});
    const auto sq = std::accumulate(q.begin(), q.end(), std::int64_t{0});
    if (sq < sp) q[0] += sp - sq;
    if (!majorizes(p, q)) continue;
    auto i = 1 + tape.uniform({"i", t, 0}, len);
    auto j = 1 + tape.uniform({"j", t, 0}, len);
    if (i > j) std::swap(i, j);
    ASSERT_TRUE(majorization_step_check(p, q, i, j));
    ++checked;
  }
}

TEST(MajorizationStep, WrongOrderRejected) {
  EXPECT_THROW(majorization_step_check({1, 1, 0}, {1, 1, 0}, 3, 1), std::invalid_argument);
  // The bumped vectors really do fail: (1,1,1) against (2,1,0).
  EXPECT_FALSE(majorizes<std::int64_t>({1, 1, 1}, {2, 1, 0}));
  EXPECT_THROW(majorization_step_check({1, 1}, {2, 0}, 1, 1), std::invalid_argument);
}

TEST(SlotLoadVector, SplitsWithinMachine) {
  EXPECT_EQ(slot_load_vector(std::vector<std::int64_t>{5, 0}, std::vector<std::int64_t>{3, 2}),
            (std::vector<std::int64_t>{2, 2, 1, 0, 0}));
  EXPECT_EQ(slot_load_vector(std::vector<std::int64_t>{6}, std::vector<std::int64_t>{3}),
            (std::vector<std::int64_t>{2, 2, 2}));
}

TEST(Coupling, UnitCapacitiesAreIdentical) {
  const std::vector<std::int64_t> caps{1, 1, 1, 1};
  EXPECT_TRUE(uniform_majorizes_nonuniform(caps, 8, 500, 1).ok());
}

TEST(Coupling, TwoThreeProfile) {
  const std::vector<std::int64_t> caps{2, 3};
  auto rep = uniform_majorizes_nonuniform(caps, 20, 10000, 2);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_EQ(rep.max_load_violations, 0u);
}

TEST(MaxMatching, SmallCases) {
  EXPECT_EQ(max_matching({}, 0), 0u);
  EXPECT_EQ(max_matching({{}, {}}, 3), 0u);
  EXPECT_EQ(max_matching({{0, 1, 2}, {0, 1, 2}, {0, 1, 2}}, 3), 3u);
  // Needs an augmenting path through two matched edges.
  EXPECT_EQ(max_matching({{0}, {0, 1}, {1, 2}}, 3), 3u);
}

TEST(MaxMatching, AgreesWithEnumeration) {
  RandomTape tape(5);
  for (std::uint64_t t = 0; t < 200; ++t) {
    std::vector<std::vector<std::uint32_t>> adj(10);
    for (std::uint32_t l = 0; l < 10; ++l) {
      for (std::uint32_t r = 0; r < 10; ++r) {
        if (tape.uniform({"e", t, l * 10 + r}, 5) == 0) adj[l].push_back(r);
      }
    }
    EXPECT_EQ(max_matching(adj, 10), brute_matching(adj, 10)) << "trial " << t;
  }
}

TEST(MaxWeightMatching, AgreesWithEnumeration) {
  RandomTape tape(6);
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto left = 1 + static_cast<std::uint32_t>(tape.uniform({"l", t, 0}, 7));
    const auto right = 1 + static_cast<std::uint32_t>(tape.uniform({"r", t, 0}, 7));
    std::vector<WeightedEdge<Rational>> edges;
    for (std::uint32_t l = 0; l < left; ++l) {
      for (std::uint32_t r = 0; r < right; ++r) {
        if (tape.uniform({"e", t, l * 16 + r}, 3) == 0) {
          edges.push_back({l, r, make_rational(static_cast<std::int64_t>(tape.uniform({"w", t, l * 16 + r}, 20)), 3)});
        }
      }
    }
    EXPECT_EQ(max_weight_matching(left, right, edges), brute_weight(left, right, edges)) << "trial " << t;
  }
}

// Weights that depend on the left vertex only: greedy over the transversal
// matroid is exact, which gives a second oracle at sizes enumeration can't reach.
TEST(MaxWeightMatching, AgreesWithTransversalGreedy) {
  RandomTape tape(7);
  for (std::uint64_t t = 0; t < 10; ++t) {
    const std::uint32_t left = 60, right = 60;
    std::vector<std::vector<std::uint32_t>> adj(left);
    std::vector<std::int64_t> w(left);
    std::vector<WeightedEdge<std::int64_t>> edges;
    for (std::uint32_t l = 0; l < left; ++l) {
      w[l] = 1 + static_cast<std::int64_t>(tape.uniform({"w", t, l}, 50));
      for (std::uint64_t c = 0; c < 3; ++c) {
        auto r = static_cast<std::uint32_t>(tape.uniform({"e", t, l * 3 + c}, right));
        adj[l].push_back(r);
        edges.push_back({l, r, w[l]});
      }
    }
    std::vector<std::uint32_t> order(left);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] > w[b]; });
    std::vector<std::vector<std::uint32_t>> chosen;
    std::int64_t greedy = 0;
    for (auto l : order) {
      chosen.push_back(adj[l]);
      if (max_matching(chosen, right) == chosen.size()) {
        greedy += w[l];
      } else {
        chosen.pop_back();
      }
    }
    EXPECT_EQ(max_weight_matching<std::int64_t>(left, right, edges), greedy) << "trial " << t;
  }
}

TEST(OptimalPacking, SmallCases) {
  EXPECT_EQ(optimal_packing({}, {}), Rational(0));
  EXPECT_EQ(optimal_packing({{1, 2}, {2, 3}, {3}}, {10, 6, 4}), Rational(14));
  EXPECT_EQ(optimal_packing({{1, 2}, {2, 3}, {3}}, {3, 6, 4}), Rational(7));
  EXPECT_THROW(optimal_packing(std::vector<std::vector<std::uint32_t>>(21, {0}), std::vector<Rational>(21, 1)),
               std::invalid_argument);
}

TEST(OptimalPacking, AgreesWithSubsetEnumeration) {
  RandomTape tape(8);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const std::size_t n = 12;
    std::vector<std::vector<std::uint32_t>> sets(n);
    std::vector<Rational> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint64_t c = 0; c < 2; ++c) {
        auto item = static_cast<std::uint32_t>(tape.uniform({"s", t, i * 2 + c}, 10));
        if (std::find(sets[i].begin(), sets[i].end(), item) == sets[i].end()) sets[i].push_back(item);
      }
      vals[i] = 1 + static_cast<std::int64_t>(tape.uniform({"v", t, i}, 9));
    }
    Rational best = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::uint32_t items = 0;
      bool ok = true;
      Rational sum = 0;
      for (std::size_t i = 0; i < n && ok; ++i) {
        if (!(mask >> i & 1)) continue;
        for (auto it : sets[i]) {
          ok = ok && !(items >> it & 1);
          items |= 1u << it;
        }
        sum += vals[i];
      }
      if (ok) best = std::max(best, sum);
    }
    EXPECT_EQ(optimal_packing(sets, vals), best) << "trial " << t;
  }
}

TEST(OptimalMakespan, Standard) {
  EXPECT_EQ(optimal_makespan_standard(std::vector<std::int64_t>{2}, 5), make_rational(5, 2));
  EXPECT_EQ(optimal_makespan_standard(std::vector<std::int64_t>{1, 1}, 3), Rational(2));
  EXPECT_EQ(optimal_makespan_standard(std::vector<std::int64_t>{1, 1}, 0), Rational(0));
  EXPECT_EQ(optimal_makespan_standard(std::vector<std::int64_t>{2, 3}, 7), make_rational(3, 2));
}

// Hand-worked restricted fixtures.
TEST(OptimalMakespan, RestrictedFixtures) {
  // Two stars: three jobs only on machine 0 (c=2), two only on machine 1 (c=1).
  EXPECT_EQ(optimal_makespan_restricted(std::vector<std::int64_t>{2, 1}, {{0}, {0}, {0}, {1}, {1}}), Rational(2));
  // Same stars but machine 1 has capacity 4.
  EXPECT_EQ(optimal_makespan_restricted(std::vector<std::int64_t>{2, 4}, {{0}, {0}, {0}, {1}, {1}}), make_rational(3, 2));
  // Four flexible jobs on capacities (1, 3): split 1 / 3.
  EXPECT_EQ(optimal_makespan_restricted(std::vector<std::int64_t>{1, 3}, {{0, 1}, {0, 1}, {0, 1}, {0, 1}}), Rational(1));
  // Chain: job 0 pinned to machine 0, jobs 1..2 may use 0 or 1, capacities (1,1).
  EXPECT_EQ(optimal_makespan_restricted(std::vector<std::int64_t>{1, 1}, {{0}, {0, 1}, {0, 1}}), Rational(2));
  // Three machines, one job each, capacities (1,2,5).
  EXPECT_EQ(optimal_makespan_restricted(std::vector<std::int64_t>{1, 2, 5}, {{0}, {1}, {2}}), Rational(1));
}

TEST(OptimalMakespan, FlowAgreesWithExhaustiveAssignment) {
  RandomTape tape(9);
  for (std::uint64_t t = 0; t < 150; ++t) {
    const auto n = 1 + static_cast<std::uint32_t>(tape.uniform({"n", t, 0}, 4));
    const auto m = 1 + static_cast<std::uint32_t>(tape.uniform({"m", t, 0}, 7));
    std::vector<std::int64_t> caps(n);
    for (std::uint32_t i = 0; i < n; ++i) caps[i] = 1 + static_cast<std::int64_t>(tape.uniform({"c", t, i}, 4));
    std::vector<std::vector<std::uint32_t>> sets(m);
    for (std::uint32_t j = 0; j < m; ++j) {
      for (std::uint64_t c = 0; c < 2; ++c) sets[j].push_back(static_cast<std::uint32_t>(tape.uniform({"s", t, j * 2 + c}, n)));
    }
    std::optional<Rational> best;
    std::vector<std::int64_t> h(n, 0);
    std::function<void(std::uint32_t)> go = [&](std::uint32_t j) {
      if (j == m) {
        Rational worst = 0;
        for (std::uint32_t i = 0; i < n; ++i) worst = std::max(worst, make_rational(h[i], caps[i]));
        if (!best || worst < *best) best = worst;
        return;
      }
      for (auto i : sets[j]) {
        ++h[i];
        go(j + 1);
        --h[i];
      }
    };
    go(0);
    EXPECT_EQ(optimal_makespan_restricted(caps, sets), *best) << "trial " << t;
  }
}
