#pragma once

// Uniform jobs on machines with claimed integer capacities. Standard setting:
// jobs pick slots and go to the least loaded one. Restricted setting: jobs
// carry machine sets M_j and go to the smallest floored post-placement load.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lcmd/instance.hpp"
#include "lcmd/oracles.hpp"
#include "lcmd/probe_cache.hpp"
#include "lcmd/query_tree.hpp"
#include "lcmd/random_tape.hpp"
#include "lcmd/rational.hpp"

namespace lcmd::scheduling {

inline constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

enum class Mode { standard, restricted };

class SchedulingInstance {
 public:
  // Seeded instance: capacities in {1..ceil(log2 n)}; restricted sets are
  // drawn capacity-proportionally from those capacities.
  static SchedulingInstance seeded(const InstanceSpec& spec) {
    if (spec.family != Family::scheduling_std && spec.family != Family::scheduling_res) {
      throw std::invalid_argument("SchedulingInstance: not a scheduling family");
    }
    validate(spec);
    auto bids = seeded_bids(spec);
    if (spec.family == Family::scheduling_std) return standard(std::move(bids), spec.m, spec.k_or_d, spec.seed);
    auto oracle = build_instance(spec, bids);
    return restricted(std::move(bids), oracle.forward_lists(), {}, spec.seed, spec.k_or_d);
  }

  static SchedulingInstance standard(std::vector<std::int64_t> bids, std::uint32_t jobs, std::uint32_t d,
                                     std::uint64_t seed) {
    check_bids(bids, 1);
    SchedulingInstance s;
    s.mode_ = Mode::standard;
    s.spec_ = InstanceSpec{seed, static_cast<std::uint32_t>(bids.size()), jobs, d, Family::scheduling_std};
    s.bids_ = std::move(bids);
    s.finish({});
    return s;
  }

  // Restricted instance from explicit sets. `pi` lists machines from most to
  // least preferred; empty means identity.
  static SchedulingInstance restricted(std::vector<std::int64_t> bids, std::vector<std::vector<std::uint32_t>> sets,
                                       std::vector<std::uint32_t> pi = {}, std::uint64_t seed = 0,
                                       std::optional<std::uint32_t> d = std::nullopt) {
    check_bids(bids, 1);
    std::uint32_t longest = 1;
    for (const auto& s : sets) longest = std::max<std::uint32_t>(longest, static_cast<std::uint32_t>(s.size()));
    const std::uint32_t dd = d.value_or(longest);
    for (const auto& s : sets) {
      if (s.size() > dd) throw std::invalid_argument("SchedulingInstance: |M_j| exceeds d");
    }
    SchedulingInstance s;
    s.mode_ = Mode::restricted;
    s.spec_ = InstanceSpec{seed, static_cast<std::uint32_t>(bids.size()), static_cast<std::uint32_t>(sets.size()), dd,
                           Family::scheduling_res};
    s.bids_ = std::move(bids);
    s.oracle_ = std::make_shared<const AdjacencyOracle>(s.spec_.m, s.spec_.n, sets);
    s.finish(std::move(pi));
    return s;
  }

  // Same instance with machine i's bid replaced by x (x = 0 allowed). In the
  // standard setting slot choices are re-derived over the new slot count
  // from the same per-job keys.
  SchedulingInstance with_bid(std::uint32_t i, std::int64_t x) const {
    if (i >= n()) throw std::invalid_argument("with_bid: unknown machine");
    if (x < 0) throw std::invalid_argument("with_bid: negative bid");
    SchedulingInstance s = *this;
    s.bids_[i] = x;
    if (mode_ == Mode::standard) {
      s.oracle_.reset();
      s.finish(pi_);
    } else {
      s.total_ = std::accumulate(s.bids_.begin(), s.bids_.end(), std::int64_t{0});
    }
    return s;
  }

  Mode mode() const noexcept { return mode_; }
  const InstanceSpec& spec() const noexcept { return spec_; }
  std::uint32_t n() const noexcept { return spec_.n; }
  std::uint32_t m() const noexcept { return spec_.m; }
  std::uint32_t d() const noexcept { return spec_.k_or_d; }
  std::uint64_t seed() const noexcept { return spec_.seed; }
  const std::vector<std::int64_t>& bids() const noexcept { return bids_; }
  std::int64_t total_capacity() const noexcept { return total_; }
  const std::vector<std::uint32_t>& pi() const noexcept { return pi_; }
  std::uint32_t priority(std::uint32_t machine) const { return priority_.at(machine); }
  // Jobs on the left; slots (standard) or machines (restricted) on the right.
  const AdjacencyOracle& oracle() const noexcept { return *oracle_; }
  const SlotMap& slots() const noexcept { return slots_; }

  // Machines a job may go to (slot owners in the standard setting).
  std::vector<std::uint32_t> machine_choices(std::uint32_t job) const {
    std::vector<std::uint32_t> out;
    for (auto r : oracle_->forward(job)) out.push_back(mode_ == Mode::standard ? slots_.owner(r) : r);
    return out;
  }

 private:
  static void check_bids(const std::vector<std::int64_t>& bids, std::int64_t floor) {
    if (bids.empty()) throw std::invalid_argument("SchedulingInstance: need at least one machine");
    for (auto b : bids) {
      if (b < floor) throw std::invalid_argument("SchedulingInstance: capacities must be positive integers");
    }
  }

  void finish(std::vector<std::uint32_t> pi) {
    total_ = std::accumulate(bids_.begin(), bids_.end(), std::int64_t{0});
    slots_ = SlotMap(bids_);
    if (mode_ == Mode::standard) {
      if (total_ < 1) throw std::invalid_argument("SchedulingInstance: B = 0");
      oracle_ = std::make_shared<const AdjacencyOracle>(build_instance(spec_, bids_));
    }
    if (pi.empty()) {
      pi.resize(n());
      std::iota(pi.begin(), pi.end(), 0u);
    }
    if (pi.size() != n()) throw std::invalid_argument("SchedulingInstance: pi must list every machine");
    priority_.assign(n(), kUnassigned);
    for (std::uint32_t pos = 0; pos < pi.size(); ++pos) {
      if (pi[pos] >= n() || priority_[pi[pos]] != kUnassigned) {
        throw std::invalid_argument("SchedulingInstance: pi is not a permutation");
      }
      priority_[pi[pos]] = pos;
    }
    pi_ = std::move(pi);
  }

  Mode mode_ = Mode::restricted;
  InstanceSpec spec_;
  std::vector<std::int64_t> bids_;
  std::int64_t total_ = 0;
  SlotMap slots_;
  std::shared_ptr<const AdjacencyOracle> oracle_;
  std::vector<std::uint32_t> pi_;
  std::vector<std::uint32_t> priority_;
};

struct Allocation {
  std::vector<std::uint32_t> assign;   // job -> machine, kUnassigned if none
  std::vector<std::int64_t> heights;   // includes any starting heights
  std::vector<std::int64_t> bids;

  Rational load(std::uint32_t i) const {
    if (bids[i] == 0) return 0;
    return make_rational(heights[i], bids[i]);
  }
  Rational makespan() const {
    Rational best = 0;
    for (std::uint32_t i = 0; i < heights.size(); ++i) best = std::max(best, load(i));
    return best;
  }
  std::int64_t placed() const { return std::accumulate(heights.begin(), heights.end(), std::int64_t{0}); }
};

// Simulated arrival order for the local algorithms: ascending hash rank,
// ties by job id.
inline std::vector<std::uint32_t> arrival_order(const SchedulingInstance& inst) {
  return rank_order(RandomTape(inst.seed()), "rank", inst.m());
}

namespace detail {

// Least-loaded chosen slot; equal loads are split by one seeded draw per job.
template <class LoadOf>
std::uint32_t slms_pick(const RandomTape& tape, std::uint32_t job, std::span<const std::uint32_t> choices,
                        LoadOf&& load_of) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<std::uint32_t> tied;
  for (auto s : choices) {
    const auto l = load_of(s);
    if (l < best) {
      best = l;
      tied.assign(1, s);
    } else if (l == best) {
      tied.push_back(s);
    }
  }
  if (tied.size() == 1) return tied[0];
  return tied[tape.uniform({"tie", job, 0}, tied.size())];
}

// Smallest floor((h+1)/b) over machines with b > 0; ties by pi.
template <class HeightOf>
std::uint32_t rlms_pick(const SchedulingInstance& inst, std::span<const std::uint32_t> choices, HeightOf&& height_of) {
  std::uint32_t best = kUnassigned;
  std::int64_t best_lp = 0;
  for (auto i : choices) {
    const auto b = inst.bids()[i];
    if (b <= 0) continue;
    const std::int64_t lp = (height_of(i) + 1) / b;
    if (best == kUnassigned || lp < best_lp || (lp == best_lp && inst.priority(i) < inst.priority(best))) {
      best = i;
      best_lp = lp;
    }
  }
  return best;
}

inline std::vector<std::uint32_t> index_order(std::uint32_t m) {
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  return order;
}

inline std::vector<std::int64_t> start_heights(const SchedulingInstance& inst, std::span<const std::int64_t> initial) {
  if (initial.empty()) return std::vector<std::int64_t>(inst.n(), 0);
  if (initial.size() != inst.n()) throw std::invalid_argument("initial heights must list every machine");
  return {initial.begin(), initial.end()};
}

}  // namespace detail

// Standard-setting allocator, jobs in `order` (index order if empty).
inline Allocation slms_online(const SchedulingInstance& inst, std::span<const std::uint32_t> order = {}) {
  if (inst.mode() != Mode::standard) throw std::invalid_argument("slms_online: needs the standard setting");
  if (inst.total_capacity() < 1) throw std::invalid_argument("slms_online: B = 0");
  const auto seq = order.empty() ? detail::index_order(inst.m()) : std::vector<std::uint32_t>(order.begin(), order.end());
  const RandomTape tape(inst.seed());
  std::vector<std::int64_t> slot_load(static_cast<std::size_t>(inst.total_capacity()), 0);
  Allocation out{std::vector<std::uint32_t>(inst.m(), kUnassigned), std::vector<std::int64_t>(inst.n(), 0), inst.bids()};
  for (auto j : seq) {
    const auto s = detail::slms_pick(tape, j, inst.oracle().forward(j), [&](std::uint32_t x) { return slot_load[x]; });
    ++slot_load[s];
    const auto i = inst.slots().owner(s);
    out.assign[j] = i;
    ++out.heights[i];
  }
  return out;
}

// Restricted-setting allocator. Jobs whose machines all bid 0 stay
// unassigned.
inline Allocation rlms_online(const SchedulingInstance& inst, std::span<const std::uint32_t> order = {},
                              std::span<const std::int64_t> initial = {}) {
  if (inst.mode() != Mode::restricted) throw std::invalid_argument("rlms_online: needs the restricted setting");
  const auto seq = order.empty() ? detail::index_order(inst.m()) : std::vector<std::uint32_t>(order.begin(), order.end());
  Allocation out{std::vector<std::uint32_t>(inst.m(), kUnassigned), detail::start_heights(inst, initial), inst.bids()};
  for (auto j : seq) {
    const auto choices = inst.oracle().forward(j);
    if (choices.empty()) throw std::invalid_argument("rlms_online: job with empty M_j");
    const auto i = detail::rlms_pick(inst, choices, [&](std::uint32_t x) { return out.heights[x]; });
    out.assign[j] = i;
    if (i != kUnassigned) ++out.heights[i];
  }
  return out;
}

// Plain post-placement-load greedy (no floor), ties by pi, jobs in index
// order. Kept for the non-monotonicity regressions.
inline Allocation greedy_unmodified(const SchedulingInstance& inst, std::span<const std::int64_t> initial = {}) {
  Allocation out{std::vector<std::uint32_t>(inst.m(), kUnassigned), detail::start_heights(inst, initial), inst.bids()};
  const auto& b = inst.bids();
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    std::uint32_t best = kUnassigned;
    for (auto i : inst.machine_choices(j)) {
      if (b[i] <= 0) continue;
      if (best == kUnassigned) {
        best = i;
        continue;
      }
      // (h_i+1)/b_i vs (h_best+1)/b_best
      const auto lhs = (out.heights[i] + 1) * b[best];
      const auto rhs = (out.heights[best] + 1) * b[i];
      if (lhs < rhs || (lhs == rhs && inst.priority(i) < inst.priority(best))) best = i;
    }
    if (inst.machine_choices(j).empty()) throw std::invalid_argument("greedy_unmodified: job with no machines");
    out.assign[j] = best;
    if (best != kUnassigned) ++out.heights[best];
  }
  return out;
}

// ---- local query trees --------------------------------------------------

namespace detail {

inline std::vector<std::uint32_t> rank_sorted_closure(const SchedulingInstance& inst, std::uint32_t job,
                                                      ProbeCache& cache) {
  const RandomTape tape(inst.seed());
  std::unordered_map<std::uint32_t, RankKey> ranks;
  auto rank = [&](std::uint32_t j) {
    auto it = ranks.find(j);
    if (it != ranks.end()) return it->second;
    return ranks.emplace(j, arrival_rank(tape, "rank", j)).first->second;
  };
  auto closure = earlier_closure(
      job, [&](std::uint32_t u) { return cache.forward(u); }, [&](std::uint32_t b) { return cache.reverse(b); },
      [&](std::uint32_t v, std::uint32_t u) { return rank(v) < rank(u); });
  std::sort(closure.begin(), closure.end(), [&](std::uint32_t a, std::uint32_t b) { return rank(a) < rank(b); });
  return closure;
}

}  // namespace detail

// Machine that slms_online (replayed in arrival order) gives `job`, found by
// resolving only earlier jobs that share a slot, transitively.
inline std::uint32_t slms_local(const SchedulingInstance& inst, std::uint32_t job, ProbeCounter& counter) {
  if (inst.mode() != Mode::standard) throw std::invalid_argument("slms_local: needs the standard setting");
  if (job >= inst.m()) throw std::invalid_argument("slms_local: unknown job");
  ProbeCache cache(inst.oracle(), counter);
  const RandomTape tape(inst.seed());
  std::unordered_map<std::uint32_t, std::int64_t> slot_load;
  std::uint32_t answer = kUnassigned;
  for (auto j : detail::rank_sorted_closure(inst, job, cache)) {
    const auto s = detail::slms_pick(tape, j, cache.forward(j), [&](std::uint32_t x) {
      auto it = slot_load.find(x);
      return it == slot_load.end() ? std::int64_t{0} : it->second;
    });
    ++slot_load[s];
    if (j == job) answer = inst.slots().owner(s);
  }
  return answer;
}

// Restricted-setting counterpart of slms_local.
inline std::uint32_t rlms_local(const SchedulingInstance& inst, std::uint32_t job, ProbeCounter& counter) {
  if (inst.mode() != Mode::restricted) throw std::invalid_argument("rlms_local: needs the restricted setting");
  if (job >= inst.m()) throw std::invalid_argument("rlms_local: unknown job");
  ProbeCache cache(inst.oracle(), counter);
  std::unordered_map<std::uint32_t, std::int64_t> height;
  std::uint32_t answer = kUnassigned;
  for (auto j : detail::rank_sorted_closure(inst, job, cache)) {
    const auto choices = cache.forward(j);
    if (choices.empty()) throw std::invalid_argument("rlms_local: job with empty M_j");
    const auto i = detail::rlms_pick(inst, choices, [&](std::uint32_t x) {
      auto it = height.find(x);
      return it == height.end() ? std::int64_t{0} : it->second;
    });
    if (i != kUnassigned) ++height[i];
    if (j == job) answer = i;
  }
  return answer;
}

// ---- payments -----------------------------------------------------------

inline Rational expected_height(std::int64_t b_i, std::int64_t b_minus_i, std::int64_t m) {
  if (b_i < 0 || b_minus_i < 0) throw std::invalid_argument("expected_height: negative capacity");
  if (b_i + b_minus_i < 1) throw std::invalid_argument("expected_height: zero total capacity");
  return make_rational(m * b_i, b_minus_i + b_i);
}

enum class PaymentScheme { expected, sampled, rerun };

inline std::string_view scheme_name(PaymentScheme s) {
  switch (s) {
    case PaymentScheme::expected: return "expected";
    case PaymentScheme::sampled: return "sampled";
    case PaymentScheme::rerun: return "rerun";
  }
  return "?";
}

struct PaymentRecord {
  std::uint32_t machine = 0;
  Rational payment = 0;
  PaymentScheme scheme = PaymentScheme::expected;
};

namespace detail {

inline std::int64_t others(const SchedulingInstance& inst, std::uint32_t i) {
  if (i >= inst.n()) throw std::invalid_argument("payment: unknown machine");
  return inst.total_capacity() - inst.bids()[i];
}

}  // namespace detail

// p_i = m b^2 / (B_-i + b) + m * sum_{x=0}^{b} x / (B_-i + x)
inline Rational slms_expected_payment(std::int64_t b, std::int64_t b_minus, std::int64_t m) {
  if (b == 0) return 0;
  Rational p = make_rational(m * b * b, b_minus + b);
  for (std::int64_t x = 1; x <= b; ++x) p += make_rational(m * x, b_minus + x);
  return p;
}

inline PaymentRecord payment_slms_expected(const SchedulingInstance& inst, std::uint32_t i) {
  if (inst.mode() != Mode::standard) throw std::invalid_argument("payment_slms_expected: needs the standard setting");
  const auto bm = detail::others(inst, i);
  return {i, slms_expected_payment(inst.bids()[i], bm, inst.m()), PaymentScheme::expected};
}

// m b^2 / B + m b k / (B_-i + k) for a given k in [1, b].
inline PaymentRecord payment_slms_sampled(const SchedulingInstance& inst, std::uint32_t i, std::int64_t k) {
  if (inst.mode() != Mode::standard) throw std::invalid_argument("payment_slms_sampled: needs the standard setting");
  const auto bm = detail::others(inst, i);
  const auto b = inst.bids()[i];
  if (k < 1 || k > b) throw std::invalid_argument("payment_slms_sampled: k outside [1, b_i]");
  const std::int64_t m = inst.m();
  Rational p = make_rational(m * b * b, bm + b) + make_rational(m * b * k, bm + k);
  return {i, p, PaymentScheme::sampled};
}

// Same, with k drawn uniformly from [1, b_i] by the seeded tape.
inline PaymentRecord payment_slms_sampled_draw(const SchedulingInstance& inst, std::uint32_t i, std::uint64_t draw) {
  const auto b = inst.bids().at(i);
  const auto k = 1 + static_cast<std::int64_t>(RandomTape(inst.seed()).uniform({"payk", i, draw}, static_cast<std::uint64_t>(b)));
  return payment_slms_sampled(inst, i, k);
}

// p_i = b_i h_i(b) + sum_{x=0}^{b_i} h_i(x, b_-i), each term a fresh run.
inline PaymentRecord payment_rlms(const SchedulingInstance& inst, std::uint32_t i) {
  if (inst.mode() != Mode::restricted) throw std::invalid_argument("payment_rlms: needs the restricted setting");
  if (i >= inst.n()) throw std::invalid_argument("payment_rlms: unknown machine");
  const auto b = inst.bids()[i];
  const auto h = rlms_online(inst).heights[i];
  Rational p = Rational(b) * h + h;
  for (std::int64_t x = 0; x < b; ++x) p += rlms_online(inst.with_bid(i, x)).heights[i];
  return {i, p, PaymentScheme::rerun};
}

// Utility of a machine with true capacity c that bid b, was paid p and got h
// jobs: p - b (h / c) b.
inline Rational machine_utility(const Rational& payment, std::int64_t height, std::int64_t bid, std::int64_t true_cap) {
  if (true_cap < 1) throw std::invalid_argument("machine_utility: true capacity must be >= 1");
  return payment - make_rational(bid * bid * height, true_cap);
}

// Payment minus completion time h / c, with no bid factor.
inline Rational load_only_utility(const Rational& payment, std::int64_t height, std::int64_t true_cap) {
  if (true_cap < 1) throw std::invalid_argument("load_only_utility: true capacity must be >= 1");
  return payment - make_rational(height, true_cap);
}

// ---- monotonicity ---------------------------------------------------------

enum class Allocator { rlms, greedy };

inline Allocation allocate(const SchedulingInstance& inst, Allocator a, std::span<const std::int64_t> initial = {}) {
  return a == Allocator::rlms ? rlms_online(inst, {}, initial) : greedy_unmodified(inst, initial);
}

// D^t(k) = jobs among the first t sent to k under `high` minus under `low`,
// for t = 1..m. The two instances may differ in bids and in their scripts.
inline std::vector<std::vector<std::int64_t>> monotonicity_trace(const SchedulingInstance& low,
                                                                 const SchedulingInstance& high, Allocator a,
                                                                 std::span<const std::int64_t> initial = {}) {
  if (low.n() != high.n() || low.m() != high.m()) throw std::invalid_argument("monotonicity_trace: shape mismatch");
  const auto lo = allocate(low, a, initial);
  const auto hi = allocate(high, a, initial);
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> d(low.n(), 0);
  for (std::uint32_t t = 0; t < low.m(); ++t) {
    if (hi.assign[t] != kUnassigned) ++d[hi.assign[t]];
    if (lo.assign[t] != kUnassigned) --d[lo.assign[t]];
    out.push_back(d);
  }
  return out;
}

inline std::vector<std::vector<std::int64_t>> monotonicity_trace(const SchedulingInstance& inst, std::uint32_t i,
                                                                 std::int64_t b, std::int64_t b_prime,
                                                                 Allocator a = Allocator::rlms) {
  if (b_prime < b) throw std::invalid_argument("monotonicity_trace: need b' >= b");
  return monotonicity_trace(inst.with_bid(i, b), inst.with_bid(i, b_prime), a);
}

// Entries breaking D^t(i) >= 0 and D^t(k) <= 0 for k != i.
inline std::size_t trace_violations(const std::vector<std::vector<std::int64_t>>& trace, std::uint32_t i) {
  std::size_t bad = 0;
  for (const auto& row : trace) {
    for (std::uint32_t k = 0; k < row.size(); ++k) bad += (k == i ? row[k] < 0 : row[k] > 0) ? 1 : 0;
  }
  return bad;
}

// ---- approximation --------------------------------------------------------

inline Rational makespan_ratio(const SchedulingInstance& inst) {
  if (inst.mode() != Mode::restricted) throw std::invalid_argument("makespan_ratio: needs the restricted setting");
  const auto alloc = rlms_online(inst);
  const auto opt = oracles::optimal_makespan_restricted(inst.bids(), inst.oracle().forward_lists());
  if (opt == 0) return 1;
  return alloc.makespan() / opt;
}

}  // namespace lcmd::scheduling
