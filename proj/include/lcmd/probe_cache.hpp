#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>

#include "lcmd/instance.hpp"
#include "lcmd/probe.hpp"

namespace lcmd {

// Per-query memo over an AdjacencyOracle: each adjacency list is charged one
// probe on first read and served from the memo afterwards. Lives for exactly
// one query, so its footprint tracks the explored region.
class ProbeCache {
 public:
  ProbeCache(const AdjacencyOracle& oracle, ProbeCounter& counter) : oracle_(oracle), counter_(counter) {}

  std::span<const std::uint32_t> forward(std::uint32_t l) {
    auto it = fwd_.find(l);
    if (it != fwd_.end()) return it->second;
    auto s = oracle_.forward(l, counter_);
    fwd_.emplace(l, s);
    return s;
  }

  std::span<const std::uint32_t> reverse(std::uint32_t r) {
    auto it = rev_.find(r);
    if (it != rev_.end()) return it->second;
    auto s = oracle_.reverse(r, counter_);
    rev_.emplace(r, s);
    return s;
  }

  const AdjacencyOracle& oracle() const noexcept { return oracle_; }
  ProbeCounter& counter() noexcept { return counter_; }

 private:
  const AdjacencyOracle& oracle_;
  ProbeCounter& counter_;
  std::unordered_map<std::uint32_t, std::span<const std::uint32_t>> fwd_;
  std::unordered_map<std::uint32_t, std::span<const std::uint32_t>> rev_;
};

}  // namespace lcmd
