#pragma once

// Random serial dictatorship over d-item preference lists.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lcmd/instance.hpp"
#include "lcmd/probe.hpp"
#include "lcmd/probe_cache.hpp"
#include "lcmd/query_tree.hpp"
#include "lcmd/random_tape.hpp"

namespace lcmd::rsd {

inline constexpr std::uint32_t kNoHouse = std::numeric_limits<std::uint32_t>::max();

class HousingInstance {
 public:
  // n agents, n houses, each agent lists d distinct houses, best first.
  static HousingInstance seeded(std::uint64_t seed, std::uint32_t n, std::uint32_t d) {
    InstanceSpec spec;
    spec.seed = seed;
    spec.family = Family::housing;
    spec.n = n;
    spec.m = n;
    spec.k_or_d = d;
    return HousingInstance(build_instance(spec).forward_lists(), seed, d, n);
  }

  static HousingInstance from_lists(std::vector<std::vector<std::uint32_t>> prefs, std::uint64_t seed = 0,
                                    std::optional<std::uint32_t> houses = std::nullopt) {
    const auto n = static_cast<std::uint32_t>(prefs.size());
    std::uint32_t d = 0;
    for (const auto& p : prefs) d = std::max<std::uint32_t>(d, static_cast<std::uint32_t>(p.size()));
    return HousingInstance(std::move(prefs), seed, d, houses.value_or(n));
  }

  std::uint32_t n() const noexcept { return oracle_.left_count(); }
  std::uint32_t houses() const noexcept { return oracle_.right_count(); }
  std::uint32_t d() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const AdjacencyOracle& oracle() const noexcept { return oracle_; }

  // r_i in [1, n^4].
  std::uint64_t rank(std::uint32_t agent) const {
    if (agent >= n()) throw std::invalid_argument("HousingInstance: unknown agent");
    return 1 + RandomTape(seed_).uniform({"rsd-rank", agent, 0}, rank_range_);
  }

  // Smaller rank first; equal ranks by agent id.
  bool before(std::uint32_t a, std::uint32_t b) const {
    const auto ra = rank(a), rb = rank(b);
    return ra != rb ? ra < rb : a < b;
  }

 private:
  HousingInstance(std::vector<std::vector<std::uint32_t>> prefs, std::uint64_t seed, std::uint32_t d,
                  std::uint32_t houses)
      : oracle_(static_cast<std::uint32_t>(prefs.size()), houses, prefs), seed_(seed), d_(d) {
    if (prefs.empty()) throw std::invalid_argument("HousingInstance: need at least one agent");
    for (const auto& p : prefs) {
      std::unordered_set<std::uint32_t> seen(p.begin(), p.end());
      if (seen.size() != p.size()) throw std::invalid_argument("HousingInstance: duplicate house in a list");
    }
    const std::uint64_t nn = prefs.size();
    if (nn > 65535) throw std::invalid_argument("HousingInstance: n^4 overflows 64 bits");
    rank_range_ = nn * nn * nn * nn;
  }

  AdjacencyOracle oracle_;
  std::uint64_t seed_;
  std::uint32_t d_;
  std::uint64_t rank_range_ = 1;
};

// agent -> house, kNoHouse when every listed house is gone.
inline std::vector<std::uint32_t> rsd_global(const HousingInstance& inst) {
  std::vector<std::uint32_t> order(inst.n());
  std::iota(order.begin(), order.end(), 0u);
  std::vector<std::uint64_t> ranks(inst.n());
  for (std::uint32_t i = 0; i < inst.n(); ++i) ranks[i] = inst.rank(i);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ranks[a] != ranks[b] ? ranks[a] < ranks[b] : a < b; });
  std::vector<std::uint32_t> out(inst.n(), kNoHouse);
  std::vector<bool> taken(inst.houses(), false);
  for (auto a : order) {
    for (auto h : inst.oracle().forward(a)) {
      if (!taken[h]) {
        taken[h] = true;
        out[a] = h;
        break;
      }
    }
  }
  return out;
}

// Follows the agent down her list; a house is free unless an earlier agent
// who listed it ended up choosing it, which is resolved the same way.
inline std::uint32_t rsd_local(const HousingInstance& inst, std::uint32_t agent, ProbeCounter& counter) {
  if (agent >= inst.n()) throw std::invalid_argument("rsd_local: unknown agent");
  ProbeCache cache(inst.oracle(), counter);
  std::unordered_map<std::uint32_t, std::uint64_t> ranks;
  auto rank = [&](std::uint32_t a) {
    auto it = ranks.find(a);
    if (it != ranks.end()) return it->second;
    return ranks.emplace(a, inst.rank(a)).first->second;
  };
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    const auto ra = rank(a), rb = rank(b);
    return ra != rb ? ra < rb : a < b;
  };
  SerialChoice sd(cache, before, false);
  const auto h = sd.choice(agent);
  return h == SerialChoice<decltype(before)>::kNothing ? kNoHouse : h;
}

}  // namespace lcmd::rsd
