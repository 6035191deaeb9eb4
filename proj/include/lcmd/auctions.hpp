#pragma once

// Unit-demand auctions (uniform value, and public sets with private values)
// and single-minded combinatorial auctions, with greedy allocation, critical
// payments and per-query local versions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcmd/instance.hpp"
#include "lcmd/probe.hpp"
#include "lcmd/probe_cache.hpp"
#include "lcmd/query_tree.hpp"
#include "lcmd/random_tape.hpp"
#include "lcmd/rational.hpp"

namespace lcmd::auctions {

inline constexpr std::uint32_t kNoBuyer = std::numeric_limits<std::uint32_t>::max();

enum class AuctionMode { uduv, udubv, ksmb };

inline std::string mode_name(AuctionMode m) {
  switch (m) {
    case AuctionMode::uduv: return "uduv";
    case AuctionMode::udubv: return "udubv";
    case AuctionMode::ksmb: return "ksmb";
  }
  return "?";
}

// Per-buyer deviations from the truth. Missing entries mean "report truth".
struct ReportOverlay {
  std::map<std::uint32_t, std::vector<std::uint32_t>> sets;
  std::map<std::uint32_t, Rational> bids;

  bool empty() const noexcept { return sets.empty() && bids.empty(); }
};

class AuctionInstance {
 public:
  // Seeded instance: each buyer wants k distinct uniform items; values are
  // 1 (uniform-value mode) or multiples of 1/10 in [0.1, 100].
  static AuctionInstance seeded(const InstanceSpec& spec) {
    AuctionMode mode;
    switch (spec.family) {
      case Family::uduv: mode = AuctionMode::uduv; break;
      case Family::udubv: mode = AuctionMode::udubv; break;
      case Family::ksmb: mode = AuctionMode::ksmb; break;
      default: throw std::invalid_argument("AuctionInstance: not an auction family");
    }
    auto oracle = build_instance(spec);
    std::vector<Rational> values(spec.n, Rational(1));
    if (mode != AuctionMode::uduv) {
      const RandomTape tape(spec.seed);
      for (std::uint32_t i = 0; i < spec.n; ++i) {
        values[i] = make_rational(1 + static_cast<std::int64_t>(tape.uniform({"value", i, 0}, 1000)), 10);
      }
    }
    return AuctionInstance(mode, spec.m, oracle.forward_lists(), std::move(values), spec.seed, spec.k_or_d);
  }

  static AuctionInstance from_sets(AuctionMode mode, std::uint32_t items, std::vector<std::vector<std::uint32_t>> sets,
                                   std::vector<Rational> values = {}, std::uint64_t seed = 0) {
    if (values.empty()) values.assign(sets.size(), Rational(1));
    std::uint32_t k = 1;
    for (const auto& s : sets) k = std::max<std::uint32_t>(k, static_cast<std::uint32_t>(s.size()));
    return AuctionInstance(mode, items, std::move(sets), std::move(values), seed, k);
  }

  // Instance as reported: overlay sets and bids replace the truth.
  AuctionInstance reported(const ReportOverlay& overlay) const {
    if (overlay.empty()) return *this;
    if (mode_ != AuctionMode::uduv && !overlay.sets.empty()) {
      for (const auto& [buyer, set] : overlay.sets) {
        if (buyer >= n() || set != sets_[buyer]) {
          throw std::invalid_argument("ReportOverlay: sets are public in " + mode_name(mode_) + " mode");
        }
      }
    }
    if (mode_ == AuctionMode::uduv && !overlay.bids.empty()) {
      throw std::invalid_argument("ReportOverlay: uniform-value mode takes no bids");
    }
    auto sets = sets_;
    auto values = values_;
    for (const auto& [buyer, set] : overlay.sets) {
      if (buyer >= n()) throw std::invalid_argument("ReportOverlay: unknown buyer");
      sets[buyer] = set;
    }
    for (const auto& [buyer, bid] : overlay.bids) {
      if (buyer >= n()) throw std::invalid_argument("ReportOverlay: unknown buyer");
      values[buyer] = bid;
    }
    return AuctionInstance(mode_, m(), std::move(sets), std::move(values), seed_, k_, true);
  }

  AuctionMode mode() const noexcept { return mode_; }
  std::uint32_t n() const noexcept { return oracle_->left_count(); }
  std::uint32_t m() const noexcept { return oracle_->right_count(); }
  std::uint32_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  // k n / m; large values mean heavy contention and slow local queries.
  double load_factor() const noexcept { return static_cast<double>(k_) * n() / std::max<std::uint32_t>(1, m()); }
  const std::vector<std::uint32_t>& set(std::uint32_t buyer) const { return sets_.at(buyer); }
  const std::vector<std::vector<std::uint32_t>>& sets() const noexcept { return sets_; }
  const Rational& value(std::uint32_t buyer) const { return values_.at(buyer); }
  const std::vector<Rational>& values() const noexcept { return values_; }
  // Buyers on the left, items on the right.
  const AdjacencyOracle& oracle() const noexcept { return *oracle_; }

  // Item order for the uniform-value mechanism: larger hash word first,
  // equal words by smaller item id.
  bool item_before(std::uint32_t a, std::uint32_t b) const {
    const RandomTape tape(seed_);
    const auto ra = tape.word({"rj", a, 0}), rb = tape.word({"rj", b, 0});
    return ra != rb ? ra > rb : a < b;
  }

  // Buyer order for the bid-based mechanisms: higher bid first, ties by id.
  bool buyer_before(std::uint32_t a, std::uint32_t b) const {
    return values_[a] != values_[b] ? values_[a] > values_[b] : a < b;
  }

 private:
  AuctionInstance(AuctionMode mode, std::uint32_t items, std::vector<std::vector<std::uint32_t>> sets,
                  std::vector<Rational> values, std::uint64_t seed, std::uint32_t k, bool allow_any_size = false)
      : mode_(mode), k_(k), seed_(seed), sets_(std::move(sets)), values_(std::move(values)) {
    if (sets_.size() != values_.size()) throw std::invalid_argument("AuctionInstance: sets/values size mismatch");
    for (const auto& s : sets_) {
      if (!allow_any_size && s.size() > k_) throw std::invalid_argument("AuctionInstance: |J_i| exceeds k");
      std::vector<std::uint32_t> sorted(s);
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("AuctionInstance: duplicate item in a set");
      }
    }
    for (const auto& v : values_) {
      if (v < 0) throw std::invalid_argument("AuctionInstance: negative value");
    }
    oracle_ = std::make_shared<const AdjacencyOracle>(static_cast<std::uint32_t>(sets_.size()), items, sets_);
  }

  AuctionMode mode_;
  std::uint32_t k_;
  std::uint64_t seed_;
  std::vector<std::vector<std::uint32_t>> sets_;
  std::vector<Rational> values_;
  std::shared_ptr<const AdjacencyOracle> oracle_;
};

struct Outcome {
  std::vector<std::vector<std::uint32_t>> award;  // buyer -> items received
  std::vector<Rational> payment;                  // 0 for losers

  bool won(std::uint32_t buyer) const { return !award.at(buyer).empty(); }
};

// Value of an award under the true data, minus the payment.
inline Rational utility(const AuctionInstance& truth, const Outcome& out, std::uint32_t buyer) {
  const auto& want = truth.set(buyer);
  const auto& got = out.award.at(buyer);
  auto has = [&](std::uint32_t item) { return std::find(got.begin(), got.end(), item) != got.end(); };
  bool valued = false;
  if (truth.mode() == AuctionMode::ksmb) {
    valued = !want.empty() && std::all_of(want.begin(), want.end(), has);
  } else {
    valued = std::any_of(want.begin(), want.end(), has);
  }
  return (valued ? truth.value(buyer) : Rational(0)) - out.payment.at(buyer);
}

inline Rational welfare_by_bids(const AuctionInstance& inst, const Outcome& out) {
  Rational total = 0;
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    if (out.won(i)) total += inst.value(i);
  }
  return total;
}

namespace detail {

inline std::vector<std::uint32_t> item_order(const AuctionInstance& inst) {
  std::vector<std::uint32_t> order(inst.m());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return inst.item_before(a, b); });
  return order;
}

inline std::vector<std::uint32_t> buyer_order(const AuctionInstance& inst) {
  std::vector<std::uint32_t> order(inst.n());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return inst.buyer_before(a, b); });
  return order;
}

// Greedy by bid over `order`, skipping `excluded`. Unit demand takes the
// smallest free item id in the set; single-minded takes the whole set or
// nothing. Returns item -> buyer.
template <class ListOf>
std::unordered_map<std::uint32_t, std::uint32_t> bid_greedy(AuctionMode mode, std::span<const std::uint32_t> order,
                                                            ListOf&& list_of, std::uint32_t excluded) {
  std::unordered_map<std::uint32_t, std::uint32_t> owner;
  for (auto b : order) {
    if (b == excluded) continue;
    const auto items = list_of(b);
    if (mode == AuctionMode::ksmb) {
      if (items.empty()) continue;
      bool free = std::none_of(items.begin(), items.end(), [&](auto j) { return owner.count(j) > 0; });
      if (free) {
        for (auto j : items) owner[j] = b;
      }
    } else {
      std::uint32_t pick = kNoBuyer;
      for (auto j : items) {
        if (!owner.count(j) && (pick == kNoBuyer || j < pick)) pick = j;
      }
      if (pick != kNoBuyer) owner[pick] = b;
    }
  }
  return owner;
}

inline std::unordered_map<std::uint32_t, std::uint32_t> global_bid_greedy(const AuctionInstance& inst,
                                                                          std::uint32_t excluded) {
  const auto order = buyer_order(inst);
  return bid_greedy(inst.mode(), order, [&](std::uint32_t b) { return inst.oracle().forward(b); }, excluded);
}

// Critical payment of buyer i from item -> buyer in the run without i.
inline Rational critical_payment(AuctionMode mode, const std::vector<std::uint32_t>& items_of_i,
                          const std::unordered_map<std::uint32_t, std::uint32_t>& owner_without_i,
                          const std::vector<Rational>& bids) {
  if (mode == AuctionMode::ksmb) {
    // Highest bid among allocated sets that meet J_i.
    Rational p = 0;
    for (auto j : items_of_i) {
      auto it = owner_without_i.find(j);
      if (it != owner_without_i.end()) p = std::max(p, bids[it->second]);
    }
    return p;
  }
  // Lowest price at which one of her items sells; 0 if one stays unsold.
  std::optional<Rational> p;
  for (auto j : items_of_i) {
    auto it = owner_without_i.find(j);
    if (it == owner_without_i.end()) return 0;
    if (!p || bids[it->second] < *p) p = bids[it->second];
  }
  return p.value_or(0);
}

}  // namespace detail

// ---- UDUV --------------------------------------------------------------

inline Outcome uduv_allocate(const AuctionInstance& inst) {
  Outcome out{std::vector<std::vector<std::uint32_t>>(inst.n()), std::vector<Rational>(inst.n(), 0)};
  for (auto j : detail::item_order(inst)) {
    // reverse lists are ascending in buyer id, so the first unserved is the
    // lexicographic winner.
    for (auto b : inst.oracle().reverse(j)) {
      if (out.award[b].empty()) {
        out.award[b].push_back(j);
        out.payment[b] = make_rational(1, 2);
        break;
      }
    }
  }
  return out;
}

inline Outcome uduv_run(const AuctionInstance& inst, const ReportOverlay& overlay = {}) {
  if (inst.mode() != AuctionMode::uduv) throw std::invalid_argument("uduv_run: wrong mode");
  return uduv_allocate(inst.reported(overlay));
}

struct BuyerAnswer {
  std::vector<std::uint32_t> award;
  Rational payment = 0;
};

namespace detail {

// Item-order greedy resolved on demand. An item goes to the first listed
// buyer not already served by an earlier item; "already served" recurses
// into that buyer's earlier items only.
class LazyUduv {
 public:
  LazyUduv(const AuctionInstance& inst, ProbeCache& cache) : inst_(inst), cache_(cache) {}

  std::uint32_t owner(std::uint32_t item) {
    if (auto it = owner_.find(item); it != owner_.end()) return it->second;
    std::uint32_t got = kNoBuyer;
    for (auto b : cache_.reverse(item)) {
      if (!served_before(b, item)) {
        got = b;
        break;
      }
    }
    owner_.emplace(item, got);
    return got;
  }

  // Item the buyer receives, kNoBuyer if none.
  std::uint32_t award(std::uint32_t buyer) {
    for (auto j : items_of(buyer)) {
      if (owner(j) == buyer) return j;
    }
    return kNoBuyer;
  }

 private:
  std::vector<std::uint32_t> items_of(std::uint32_t buyer) {
    auto s = cache_.forward(buyer);
    std::vector<std::uint32_t> out(s.begin(), s.end());
    std::sort(out.begin(), out.end(), [&](auto x, auto y) { return inst_.item_before(x, y); });
    return out;
  }

  bool served_before(std::uint32_t buyer, std::uint32_t item) {
    for (auto j : items_of(buyer)) {
      if (!inst_.item_before(j, item)) break;
      if (owner(j) == buyer) return true;
    }
    return false;
  }

  const AuctionInstance& inst_;
  ProbeCache& cache_;
  std::unordered_map<std::uint32_t, std::uint32_t> owner_;
};

}  // namespace detail

// Buyer that `item` goes to, kNoBuyer if nobody.
inline std::uint32_t uduv_local_item(const AuctionInstance& inst, std::uint32_t item, ProbeCounter& counter) {
  if (inst.mode() != AuctionMode::uduv) throw std::invalid_argument("uduv_local: wrong mode");
  if (item >= inst.m()) throw std::invalid_argument("uduv_local: unknown item");
  ProbeCache cache(inst.oracle(), counter);
  return detail::LazyUduv(inst, cache).owner(item);
}

inline BuyerAnswer uduv_local_buyer(const AuctionInstance& inst, std::uint32_t buyer, ProbeCounter& counter) {
  if (inst.mode() != AuctionMode::uduv) throw std::invalid_argument("uduv_local: wrong mode");
  if (buyer >= inst.n()) throw std::invalid_argument("uduv_local: unknown buyer");
  ProbeCache cache(inst.oracle(), counter);
  BuyerAnswer ans;
  const auto j = detail::LazyUduv(inst, cache).award(buyer);
  if (j != kNoBuyer) {
    ans.award.push_back(j);
    ans.payment = make_rational(1, 2);
  }
  return ans;
}

// ---- bid-ordered greedy (UDUBV, kSMB) ----------------------------------------

inline Outcome bid_greedy_allocate(const AuctionInstance& inst) {
  Outcome out{std::vector<std::vector<std::uint32_t>>(inst.n()), std::vector<Rational>(inst.n(), 0)};
  const auto order = detail::buyer_order(inst);
  auto run = [&](std::uint32_t excluded) {
    return detail::bid_greedy(inst.mode(), order, [&](std::uint32_t b) { return inst.oracle().forward(b); }, excluded);
  };
  const auto owner = run(kNoBuyer);
  for (const auto& [item, buyer] : owner) out.award[buyer].push_back(item);
  for (auto& a : out.award) std::sort(a.begin(), a.end());
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    if (!out.won(i)) continue;
    const auto without = run(i);
    out.payment[i] = detail::critical_payment(inst.mode(), inst.set(i), without, inst.values());
  }
  return out;
}

inline Outcome udubv_run(const AuctionInstance& inst, const ReportOverlay& overlay = {}) {
  if (inst.mode() != AuctionMode::udubv) throw std::invalid_argument("udubv_run: wrong mode");
  return bid_greedy_allocate(inst.reported(overlay));
}

inline Outcome ksmb_run(const AuctionInstance& inst, const ReportOverlay& overlay = {}) {
  if (inst.mode() != AuctionMode::ksmb) throw std::invalid_argument("ksmb_run: wrong mode");
  return bid_greedy_allocate(inst.reported(overlay));
}

namespace detail {

struct BidOrder {
  const AuctionInstance* inst;
  bool operator()(std::uint32_t a, std::uint32_t b) const { return inst->buyer_before(a, b); }
};

// Single-minded greedy resolved on demand: a buyer wins unless an earlier
// buyer sharing an item wins, and stops at the first such winner.
class LazyPacking {
 public:
  LazyPacking(const AuctionInstance& inst, ProbeCache& cache, std::uint32_t excluded = kNoBuyer)
      : inst_(inst), cache_(cache), excluded_(excluded) {}

  bool wins(std::uint32_t buyer) {
    if (buyer == excluded_) return false;
    if (auto it = memo_.find(buyer); it != memo_.end()) return it->second;
    const auto items = cache_.forward(buyer);
    bool ok = !items.empty();
    for (auto j : items) {
      for (auto c : rivals(j)) {
        if (!inst_.buyer_before(c, buyer)) break;
        if (wins(c)) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    memo_.emplace(buyer, ok);
    return ok;
  }

  std::uint32_t holder(std::uint32_t item) {
    for (auto c : rivals(item)) {
      if (wins(c)) return c;
    }
    return kNoBuyer;
  }

 private:
  std::vector<std::uint32_t> rivals(std::uint32_t item) {
    std::vector<std::uint32_t> out;
    for (auto c : cache_.reverse(item)) {
      if (c != excluded_) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), BidOrder{&inst_});
    return out;
  }

  const AuctionInstance& inst_;
  ProbeCache& cache_;
  std::uint32_t excluded_;
  std::unordered_map<std::uint32_t, bool> memo_;
};

using LazyUnit = SerialChoice<BidOrder>;

inline std::uint32_t unit_choice(LazyUnit& sd, std::uint32_t buyer) {
  const auto h = sd.choice(buyer);
  return h == LazyUnit::kNothing ? kNoBuyer : h;
}

}  // namespace detail

// Award and critical payment for one buyer, probing only the higher-bid
// buyers her outcome depends on, then the same region with her removed.
inline BuyerAnswer bid_greedy_local(const AuctionInstance& inst, std::uint32_t buyer, ProbeCounter& counter) {
  if (inst.mode() == AuctionMode::uduv) throw std::invalid_argument("local auction query: needs a bid mode");
  if (buyer >= inst.n()) throw std::invalid_argument("local auction query: unknown buyer");
  ProbeCache cache(inst.oracle(), counter);
  BuyerAnswer ans;
  const auto s = cache.forward(buyer);
  const std::vector<std::uint32_t> mine(s.begin(), s.end());
  if (inst.mode() == AuctionMode::ksmb) {
    if (!detail::LazyPacking(inst, cache).wins(buyer)) return ans;
    ans.award = mine;
    std::sort(ans.award.begin(), ans.award.end());
    // Rivals ahead of her lose in both runs since she won; the first later
    // rival that wins without her sets the price.
    std::vector<std::uint32_t> rivals;
    for (auto j : mine) {
      for (auto c : cache.reverse(j)) {
        if (c != buyer && inst.buyer_before(buyer, c)) rivals.push_back(c);
      }
    }
    std::sort(rivals.begin(), rivals.end(), detail::BidOrder{&inst});
    rivals.erase(std::unique(rivals.begin(), rivals.end()), rivals.end());
    detail::LazyPacking without(inst, cache, buyer);
    for (auto c : rivals) {
      if (without.wins(c)) {
        ans.payment = inst.value(c);
        break;
      }
    }
    return ans;
  }
  detail::LazyUnit with(cache, detail::BidOrder{&inst}, true);
  const auto h = detail::unit_choice(with, buyer);
  if (h == kNoBuyer) return ans;
  ans.award.push_back(h);
  detail::LazyUnit without(cache, detail::BidOrder{&inst}, true, buyer);
  std::optional<Rational> p;
  for (auto j : mine) {
    const auto c = without.holder(j);
    if (c == detail::LazyUnit::kNothing) {
      p = Rational(0);
      break;
    }
    if (!p || inst.value(c) < *p) p = inst.value(c);
  }
  ans.payment = p.value_or(0);
  return ans;
}

inline BuyerAnswer udubv_local(const AuctionInstance& inst, std::uint32_t buyer, ProbeCounter& counter) {
  if (inst.mode() != AuctionMode::udubv) throw std::invalid_argument("udubv_local: wrong mode");
  return bid_greedy_local(inst, buyer, counter);
}

inline BuyerAnswer ksmb_local(const AuctionInstance& inst, std::uint32_t buyer, ProbeCounter& counter) {
  if (inst.mode() != AuctionMode::ksmb) throw std::invalid_argument("ksmb_local: wrong mode");
  return bid_greedy_local(inst, buyer, counter);
}

// Buyer holding `item` in the bid-ordered run, kNoBuyer if unsold.
inline std::uint32_t bid_greedy_local_item(const AuctionInstance& inst, std::uint32_t item, ProbeCounter& counter) {
  if (inst.mode() == AuctionMode::uduv) throw std::invalid_argument("local auction query: needs a bid mode");
  if (item >= inst.m()) throw std::invalid_argument("local auction query: unknown item");
  ProbeCache cache(inst.oracle(), counter);
  if (inst.mode() == AuctionMode::ksmb) return detail::LazyPacking(inst, cache).holder(item);
  detail::LazyUnit sd(cache, detail::BidOrder{&inst}, true);
  const auto c = sd.holder(item);
  return c == detail::LazyUnit::kNothing ? kNoBuyer : c;
}

// Critical value of any buyer, winner or not: the bid at which she would
// start winning. Charged only to winners; for losers it is informational.
inline Rational shadow_payment(const AuctionInstance& inst, std::uint32_t buyer) {
  if (inst.mode() == AuctionMode::uduv) throw std::invalid_argument("shadow_payment: needs a bid mode");
  if (buyer >= inst.n()) throw std::invalid_argument("shadow_payment: unknown buyer");
  return detail::critical_payment(inst.mode(), inst.set(buyer), detail::global_bid_greedy(inst, buyer), inst.values());
}

// Overlay-taking spellings of the local queries.
inline BuyerAnswer uduv_local_buyer(const AuctionInstance& inst, const ReportOverlay& overlay, std::uint32_t buyer,
                                    ProbeCounter& counter) {
  return uduv_local_buyer(inst.reported(overlay), buyer, counter);
}
inline BuyerAnswer udubv_local(const AuctionInstance& inst, const ReportOverlay& overlay, std::uint32_t buyer,
                               ProbeCounter& counter) {
  return udubv_local(inst.reported(overlay), buyer, counter);
}
inline BuyerAnswer ksmb_local(const AuctionInstance& inst, const ReportOverlay& overlay, std::uint32_t buyer,
                              ProbeCounter& counter) {
  return ksmb_local(inst.reported(overlay), buyer, counter);
}

// ---- truthfulness audit -----------------------------------------------------

using Mechanism = std::function<Outcome(const AuctionInstance&, const ReportOverlay&)>;

inline Mechanism mechanism_for(AuctionMode mode) {
  switch (mode) {
    case AuctionMode::uduv: return [](const AuctionInstance& i, const ReportOverlay& o) { return uduv_run(i, o); };
    case AuctionMode::udubv: return [](const AuctionInstance& i, const ReportOverlay& o) { return udubv_run(i, o); };
    case AuctionMode::ksmb: return [](const AuctionInstance& i, const ReportOverlay& o) { return ksmb_run(i, o); };
  }
  throw std::invalid_argument("mechanism_for: unknown mode");
}

struct DeviationGrid {
  // Uniform value: every subset of the m items (m <= 16).
  bool all_subsets = false;
  // Bid modes: 0, p_i +- eps, t_i +- delta, 2 t_i and every rival bid +- eps.
  bool bid_points = false;
  Rational eps = make_rational(1, 1000);
  Rational delta = make_rational(1, 10);

  static DeviationGrid none() { return {}; }
  static DeviationGrid standard(AuctionMode mode) {
    DeviationGrid g;
    if (mode == AuctionMode::uduv) {
      g.all_subsets = true;
    } else {
      g.bid_points = true;
    }
    return g;
  }
};

struct Violation {
  std::uint32_t buyer = 0;
  std::string deviation;
  Rational truthful_utility = 0;
  Rational deviant_utility = 0;
};

inline std::vector<Violation> truthfulness_audit(const AuctionInstance& inst, const Mechanism& mech,
                                                 const DeviationGrid& grid) {
  std::vector<Violation> out;
  if (!grid.all_subsets && !grid.bid_points) return out;
  const Outcome truth = mech(inst, {});
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    const Rational honest = utility(inst, truth, i);
    auto check = [&](const ReportOverlay& o, std::string label) {
      const Rational u = utility(inst, mech(inst, o), i);
      if (u > honest) out.push_back({i, std::move(label), honest, u});
    };
    if (grid.all_subsets) {
      if (inst.m() > 16) throw std::invalid_argument("truthfulness_audit: subset grid needs m <= 16");
      for (std::uint32_t mask = 0; mask < (1u << inst.m()); ++mask) {
        ReportOverlay o;
        auto& s = o.sets[i];
        for (std::uint32_t j = 0; j < inst.m(); ++j) {
          if (mask >> j & 1) s.push_back(j);
        }
        check(o, "set mask " + std::to_string(mask));
      }
    }
    if (grid.bid_points) {
      const Rational t = inst.value(i);
      std::vector<Rational> points{0, truth.payment[i] + grid.eps, truth.payment[i] - grid.eps, t + grid.delta,
                                   t - grid.delta, 2 * t};
      for (std::uint32_t r = 0; r < inst.n(); ++r) {
        if (r == i) continue;
        points.push_back(inst.value(r) + grid.eps);
        points.push_back(inst.value(r) - grid.eps);
        points.push_back(inst.value(r));
      }
      for (const auto& b : points) {
        if (b < 0) continue;
        ReportOverlay o;
        o.bids[i] = b;
        check(o, "bid " + to_string(b));
      }
    }
  }
  return out;
}

}  // namespace lcmd::auctions
