#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lcmd/probe.hpp"
#include "lcmd/random_tape.hpp"

namespace lcmd {

enum class Family { matching, scheduling_std, scheduling_res, uduv, udubv, ksmb, housing };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::matching: return "matching";
    case Family::scheduling_std: return "scheduling-std";
    case Family::scheduling_res: return "scheduling-res";
    case Family::uduv: return "uduv";
    case Family::udubv: return "udubv";
    case Family::ksmb: return "ksmb";
    case Family::housing: return "housing";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::matching, Family::scheduling_std, Family::scheduling_res, Family::uduv,
                   Family::udubv, Family::ksmb, Family::housing}) {
    if (family_name(f) == s) return f;
  }
  throw std::invalid_argument("unknown family: " + std::string(s));
}

// Seed plus parameters from which a market instance is derived.
//
// `n` counts the left-hand agents for matching (men), auctions (buyers) and
// housing (agents), and the machines for scheduling. `m` counts women, items,
// houses or jobs respectively. `k_or_d` is the list length or choice count.
struct InstanceSpec {
  std::uint64_t seed = 0;
  std::uint32_t n = 1;
  std::uint32_t m = 1;
  std::uint32_t k_or_d = 1;
  Family family = Family::matching;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

inline bool without_replacement(Family f) {
  return f != Family::scheduling_res && f != Family::scheduling_std;
}

inline void validate(const InstanceSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw std::invalid_argument("InstanceSpec: n and m must be >= 1");
  if (spec.k_or_d < 1) throw std::invalid_argument("InstanceSpec: k/d must be >= 1");
  if (without_replacement(spec.family) && spec.k_or_d > spec.m) {
    throw std::invalid_argument("InstanceSpec: k exceeds the number of right-hand entities");
  }
}

enum class Side : std::uint8_t { left, right };

struct Entity {
  Side side = Side::left;
  std::uint32_t id = 0;

  friend bool operator==(const Entity&, const Entity&) = default;
  friend auto operator<=>(const Entity&, const Entity&) = default;
};

// Bidirectional incidence between left entities (men, jobs, buyers, agents)
// and right entities (women, machines or slots, items, houses). Lists are
// stored in CSR form; the reverse side is built once at construction.
//
// Every access that takes a ProbeCounter costs one probe. The counter-free
// accessors are for global reference algorithms and setup code.
class AdjacencyOracle {
 public:
  AdjacencyOracle() = default;

  AdjacencyOracle(std::uint32_t left_count, std::uint32_t right_count,
                  const std::vector<std::vector<std::uint32_t>>& forward_lists)
      : left_count_(left_count), right_count_(right_count) {
    if (forward_lists.size() != left_count) {
      throw std::invalid_argument("AdjacencyOracle: forward list count mismatch");
    }
    fwd_offsets_.clear();
    fwd_offsets_.reserve(left_count + 1);
    fwd_offsets_.push_back(0);
    std::vector<std::uint32_t> degree(right_count, 0);
    for (const auto& list : forward_lists) {
      for (std::uint32_t r : list) {
        if (r >= right_count) throw std::invalid_argument("AdjacencyOracle: neighbor id out of range");
        fwd_.push_back(r);
        ++degree[r];
      }
      fwd_offsets_.push_back(static_cast<std::uint32_t>(fwd_.size()));
    }
    rev_offsets_.assign(right_count + 1, 0);
    for (std::uint32_t r = 0; r < right_count; ++r) rev_offsets_[r + 1] = rev_offsets_[r] + degree[r];
    rev_.resize(fwd_.size());
    std::vector<std::uint32_t> cursor(rev_offsets_.begin(), rev_offsets_.end() - 1);
    // Reverse lists are ascending in left id; duplicate entries in a forward
    // list (restricted scheduling) appear once per occurrence.
    for (std::uint32_t l = 0; l < left_count; ++l) {
      for (std::uint32_t p = fwd_offsets_[l]; p < fwd_offsets_[l + 1]; ++p) {
        rev_[cursor[fwd_[p]]++] = l;
      }
    }
  }

  std::uint32_t left_count() const noexcept { return left_count_; }
  std::uint32_t right_count() const noexcept { return right_count_; }

  std::span<const std::uint32_t> forward(std::uint32_t l) const {
    check(l, left_count_);
    return {fwd_.data() + fwd_offsets_[l], fwd_offsets_[l + 1] - fwd_offsets_[l]};
  }
  std::span<const std::uint32_t> reverse(std::uint32_t r) const {
    check(r, right_count_);
    return {rev_.data() + rev_offsets_[r], rev_offsets_[r + 1] - rev_offsets_[r]};
  }

  std::span<const std::uint32_t> forward(std::uint32_t l, ProbeCounter& counter) const {
    auto s = forward(l);
    counter.tick();
    return s;
  }
  std::span<const std::uint32_t> reverse(std::uint32_t r, ProbeCounter& counter) const {
    auto s = reverse(r);
    counter.tick();
    return s;
  }

  std::span<const std::uint32_t> neighbors(Entity v, ProbeCounter& counter) const {
    return v.side == Side::left ? forward(v.id, counter) : reverse(v.id, counter);
  }

  bool contains(Entity v) const noexcept {
    return v.side == Side::left ? v.id < left_count_ : v.id < right_count_;
  }

  std::vector<std::vector<std::uint32_t>> forward_lists() const {
    std::vector<std::vector<std::uint32_t>> out(left_count_);
    for (std::uint32_t l = 0; l < left_count_; ++l) {
      auto s = forward(l);
      out[l].assign(s.begin(), s.end());
    }
    return out;
  }

 private:
  static void check(std::uint32_t id, std::uint32_t count) {
    if (id >= count) throw std::invalid_argument("AdjacencyOracle: unknown entity");
  }

  std::uint32_t left_count_ = 0;
  std::uint32_t right_count_ = 0;
  std::vector<std::uint32_t> fwd_offsets_{0};
  std::vector<std::uint32_t> fwd_;
  std::vector<std::uint32_t> rev_offsets_;
  std::vector<std::uint32_t> rev_;
};

// `count` distinct values from [0, range) for entity `id`, in draw order.
// Duplicates are rejected and redrawn with the next draw index.
inline std::vector<std::uint32_t> sample_distinct(const RandomTape& tape, std::string_view tag,
                                                  std::uint64_t id, std::uint32_t count,
                                                  std::uint32_t range) {
  if (count > range) throw std::invalid_argument("sample_distinct: count exceeds range");
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::uint64_t draw = 0; out.size() < count; ++draw) {
    auto v = static_cast<std::uint32_t>(tape.uniform({tag, id, draw}, range));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

// Seeded machine capacities in {1, ..., max(1, ceil(log2 n))}.
inline std::vector<std::int64_t> seeded_bids(const InstanceSpec& spec) {
  const auto top = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::log2(spec.n))));
  RandomTape tape(spec.seed);
  std::vector<std::int64_t> bids(spec.n);
  for (std::uint32_t i = 0; i < spec.n; ++i) {
    bids[i] = 1 + static_cast<std::int64_t>(tape.uniform({"bid", i, 0}, top));
  }
  return bids;
}

// Maps a slot index in [0, sum(caps)) to the machine that owns it.
class SlotMap {
 public:
  SlotMap() = default;
  explicit SlotMap(std::span<const std::int64_t> caps) {
    prefix_.clear();
    prefix_.reserve(caps.size() + 1);
    prefix_.push_back(0);
    for (auto c : caps) {
      if (c < 0) throw std::invalid_argument("SlotMap: negative capacity");
      prefix_.push_back(prefix_.back() + c);
    }
  }
  std::int64_t total() const noexcept { return prefix_.back(); }
  std::uint32_t owner(std::int64_t slot) const {
    if (slot < 0 || slot >= total()) throw std::invalid_argument("SlotMap: slot out of range");
    auto it = std::upper_bound(prefix_.begin(), prefix_.end(), slot);
    return static_cast<std::uint32_t>(std::distance(prefix_.begin(), it) - 1);
  }

 private:
  std::vector<std::int64_t> prefix_{0};
};

// Restricted scheduling choice sets: each job draws d slots uniformly over the
// total capacity (duplicates allowed) and keeps the owning machines.
inline std::vector<std::vector<std::uint32_t>> capacity_proportional_choices(
    const InstanceSpec& spec, std::span<const std::int64_t> caps) {
  SlotMap slots(caps);
  if (slots.total() <= 0) throw std::invalid_argument("capacity_proportional_choices: zero total capacity");
  RandomTape tape(spec.seed);
  std::vector<std::vector<std::uint32_t>> choices(spec.m);
  for (std::uint32_t j = 0; j < spec.m; ++j) {
    choices[j].reserve(spec.k_or_d);
    for (std::uint32_t t = 0; t < spec.k_or_d; ++t) {
      auto slot = static_cast<std::int64_t>(tape.uniform({"mj", j, t}, static_cast<std::uint64_t>(slots.total())));
      choices[j].push_back(slots.owner(slot));
    }
  }
  return choices;
}

// Standard scheduling slot choices: d distinct slots out of B for job j.
// Keys depend only on (seed, job, draw), so a rerun with a different slot
// count reuses the same per-job keys.
inline std::vector<std::uint32_t> standard_slot_choices(const RandomTape& tape, std::uint32_t job,
                                                        std::uint32_t d, std::int64_t total_slots) {
  if (total_slots <= 0) throw std::invalid_argument("standard_slot_choices: B must be >= 1");
  const auto want = static_cast<std::uint32_t>(std::min<std::int64_t>(d, total_slots));
  return sample_distinct(tape, "slot", job, want, static_cast<std::uint32_t>(total_slots));
}

// Builds the incidence oracle for `spec`.
//
// Left side is men / buyers / agents; for scheduling it is jobs (m of them)
// and the right side is machines (restricted) or slots (standard).
inline AdjacencyOracle build_instance(const InstanceSpec& spec,
                                      std::optional<std::vector<std::int64_t>> bids = std::nullopt) {
  validate(spec);
  RandomTape tape(spec.seed);
  switch (spec.family) {
    case Family::scheduling_res: {
      auto caps = bids ? *bids : seeded_bids(spec);
      if (caps.size() != spec.n) throw std::invalid_argument("build_instance: bids size must equal n");
      return AdjacencyOracle(spec.m, spec.n, capacity_proportional_choices(spec, caps));
    }
    case Family::scheduling_std: {
      auto caps = bids ? *bids : seeded_bids(spec);
      if (caps.size() != spec.n) throw std::invalid_argument("build_instance: bids size must equal n");
      const auto total = std::accumulate(caps.begin(), caps.end(), std::int64_t{0});
      std::vector<std::vector<std::uint32_t>> lists(spec.m);
      for (std::uint32_t j = 0; j < spec.m; ++j) lists[j] = standard_slot_choices(tape, j, spec.k_or_d, total);
      return AdjacencyOracle(spec.m, static_cast<std::uint32_t>(total), lists);
    }
    default: {
      std::vector<std::vector<std::uint32_t>> lists(spec.n);
      for (std::uint32_t i = 0; i < spec.n; ++i) lists[i] = sample_distinct(tape, "adj", i, spec.k_or_d, spec.m);
      return AdjacencyOracle(spec.n, spec.m, lists);
    }
  }
}

struct Neighborhood {
  std::vector<Entity> members;          // BFS order, starting at the source
  std::vector<std::uint32_t> distance;  // parallel to members
};

// All entities within `radius` hops of `v`. One probe per adjacency list read;
// the lists of entities on the outer ring are not read.
inline Neighborhood neighborhood(const AdjacencyOracle& oracle, Entity v, std::uint32_t radius,
                                 ProbeCounter& counter) {
  if (!oracle.contains(v)) throw std::invalid_argument("neighborhood: unknown entity");
  Neighborhood out;
  std::unordered_set<std::uint64_t> seen;
  auto key = [](Entity e) { return (std::uint64_t{e.side == Side::right} << 32) | e.id; };
  out.members.push_back(v);
  out.distance.push_back(0);
  seen.insert(key(v));
  for (std::size_t head = 0; head < out.members.size(); ++head) {
    const Entity u = out.members[head];
    const std::uint32_t du = out.distance[head];
    if (du >= radius) continue;
    const Side other = u.side == Side::left ? Side::right : Side::left;
    for (std::uint32_t w : oracle.neighbors(u, counter)) {
      Entity e{other, w};
      if (!seen.insert(key(e)).second) continue;
      out.members.push_back(e);
      out.distance.push_back(du + 1);
    }
  }
  return out;
}

}  // namespace lcmd
