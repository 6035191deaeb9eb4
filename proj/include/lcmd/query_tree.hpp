#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string_view>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lcmd/probe_cache.hpp"
#include "lcmd/random_tape.hpp"

namespace lcmd {

// Arrival key: a 64-bit hash word with the entity id as tie-break.
using RankKey = std::pair<std::uint64_t, std::uint32_t>;

inline RankKey arrival_rank(const RandomTape& tape, std::string_view tag, std::uint32_t id) {
  return {tape.word({tag, id, 0}), id};
}

// Ids 0..count-1 sorted by arrival rank.
inline std::vector<std::uint32_t> rank_order(const RandomTape& tape, std::string_view tag, std::uint32_t count) {
  std::vector<RankKey> keys(count);
  for (std::uint32_t i = 0; i < count; ++i) keys[i] = arrival_rank(tape, tag, i);
  std::sort(keys.begin(), keys.end());
  std::vector<std::uint32_t> out(count);
  for (std::uint32_t i = 0; i < count; ++i) out[i] = keys[i].second;
  return out;
}

// Everything the roots transitively depend on: an entity u depends on every
// v that shares a bin with it and comes earlier. `bins(u)` and `members(b)`
// do the probing. Returned in discovery order, roots first.
template <class Bins, class Members, class Earlier>
std::vector<std::uint32_t> earlier_closure(std::span<const std::uint32_t> roots, Bins&& bins, Members&& members,
                                           Earlier&& earlier) {
  std::vector<std::uint32_t> out;
  std::unordered_set<std::uint32_t> seen;
  for (auto r : roots) {
    if (seen.insert(r).second) out.push_back(r);
  }
  for (std::size_t head = 0; head < out.size(); ++head) {
    const std::uint32_t u = out[head];
    for (std::uint32_t b : bins(u)) {
      for (std::uint32_t v : members(b)) {
        if (v != u && earlier(v, u) && seen.insert(v).second) out.push_back(v);
      }
    }
  }
  return out;
}

template <class Bins, class Members, class Earlier>
std::vector<std::uint32_t> earlier_closure(std::uint32_t root, Bins&& bins, Members&& members, Earlier&& earlier) {
  const std::uint32_t roots[] = {root};
  return earlier_closure(std::span<const std::uint32_t>(roots), bins, members, earlier);
}

// Serial dictatorship evaluated lazily: agents move in `before` order, each
// takes the first still-free item of its list. An agent's choice only
// recurses into earlier agents that listed an item it actually inspects, and
// stops at the first free one. `excluded` drops one agent from the market.
template <class Before>
class SerialChoice {
 public:
  static constexpr std::uint32_t kNothing = std::numeric_limits<std::uint32_t>::max();

  SerialChoice(ProbeCache& cache, Before before, bool ascending_items, std::uint32_t excluded = kNothing)
      : cache_(cache), before_(std::move(before)), ascending_(ascending_items), excluded_(excluded) {}

  std::uint32_t choice(std::uint32_t agent) {
    if (agent == excluded_) return kNothing;
    if (auto it = memo_.find(agent); it != memo_.end()) return it->second;
    std::uint32_t got = kNothing;
    for (auto h : list(agent)) {
      if (!taken_before(h, agent)) {
        got = h;
        break;
      }
    }
    memo_.emplace(agent, got);
    return got;
  }

  // Agent that ends up with `item`, kNothing if it stays free.
  std::uint32_t holder(std::uint32_t item) {
    for (auto b : rivals(item)) {
      if (choice(b) == item) return b;
    }
    return kNothing;
  }

 private:
  std::vector<std::uint32_t> list(std::uint32_t agent) {
    auto s = cache_.forward(agent);
    std::vector<std::uint32_t> out(s.begin(), s.end());
    if (ascending_) std::sort(out.begin(), out.end());
    return out;
  }

  // Other agents listing `item`, earliest first.
  std::vector<std::uint32_t> rivals(std::uint32_t item) {
    std::vector<std::uint32_t> out;
    for (auto b : cache_.reverse(item)) {
      if (b != excluded_) out.push_back(b);
    }
    std::sort(out.begin(), out.end(), [&](auto a, auto b) { return before_(a, b); });
    return out;
  }

  bool taken_before(std::uint32_t item, std::uint32_t agent) {
    for (auto b : rivals(item)) {
      if (!before_(b, agent)) break;
      if (choice(b) == item) return true;
    }
    return false;
  }

  ProbeCache& cache_;
  Before before_;
  bool ascending_;
  std::uint32_t excluded_;
  std::unordered_map<std::uint32_t, std::uint32_t> memo_;
};

}  // namespace lcmd
