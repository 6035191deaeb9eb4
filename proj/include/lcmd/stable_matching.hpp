#pragma once

// Gale-Shapley with bounded lists: global reference, the round-truncated
// variant, and two local engines that reproduce the truncated run per man.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcmd/instance.hpp"
#include "lcmd/probe_cache.hpp"
#include "lcmd/random_tape.hpp"

namespace lcmd::matching {

inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Men propose, women hold. Men's lists come from the oracle (forward order is
// preference order); women rank suitors by a strict score.
class MatchingInstance {
 public:
  // Seeded k-uniform instance: each man lists k distinct women uniformly at
  // random; women's priorities are keyed hash scores.
  static MatchingInstance seeded(const InstanceSpec& spec) {
    InstanceSpec s = spec;
    s.family = Family::matching;
    MatchingInstance inst;
    inst.spec_ = s;
    inst.prefs_ = build_instance(s);
    return inst;
  }

  // Hand-built instance. `women_prefs[w]` lists men best-first; men missing
  // from a woman's list rank below every listed man, ordered by hash score.
  static MatchingInstance from_lists(std::uint32_t women, const std::vector<std::vector<std::uint32_t>>& men_prefs,
                                     const std::vector<std::vector<std::uint32_t>>& women_prefs = {},
                                     std::uint64_t seed = 0) {
    MatchingInstance inst;
    const auto men = static_cast<std::uint32_t>(men_prefs.size());
    std::uint32_t longest = 1;
    for (const auto& list : men_prefs) {
      for (std::size_t a = 0; a < list.size(); ++a) {
        for (std::size_t b = a + 1; b < list.size(); ++b) {
          if (list[a] == list[b]) throw std::invalid_argument("MatchingInstance: duplicate woman in a man's list");
        }
      }
      longest = std::max<std::uint32_t>(longest, static_cast<std::uint32_t>(list.size()));
    }
    inst.spec_ = InstanceSpec{seed, std::max<std::uint32_t>(1, men), std::max<std::uint32_t>(1, women), longest,
                              Family::matching};
    inst.prefs_ = AdjacencyOracle(men, women, men_prefs);
    if (!women_prefs.empty()) {
      if (women_prefs.size() != women) throw std::invalid_argument("MatchingInstance: women_prefs size mismatch");
      inst.explicit_rank_.resize(women);
      for (std::uint32_t w = 0; w < women; ++w) {
        const auto& list = women_prefs[w];
        for (std::size_t pos = 0; pos < list.size(); ++pos) {
          inst.explicit_rank_[w].emplace(list[pos], static_cast<std::uint32_t>(list.size() - pos));
        }
      }
    }
    return inst;
  }

  const InstanceSpec& spec() const noexcept { return spec_; }
  const AdjacencyOracle& oracle() const noexcept { return prefs_; }
  std::uint32_t men() const noexcept { return prefs_.left_count(); }
  std::uint32_t women() const noexcept { return prefs_.right_count(); }

  // True iff woman `w` strictly prefers man `a` to man `b`.
  bool prefers(std::uint32_t w, std::uint32_t a, std::uint32_t b) const {
    const auto sa = score(w, a);
    const auto sb = score(w, b);
    if (sa != sb) return sa > sb;
    return a < b;
  }

 private:
  // (explicit rank, hashed score); explicit ranks dominate.
  std::pair<std::uint32_t, std::uint64_t> score(std::uint32_t w, std::uint32_t man) const {
    std::uint32_t rank = 0;
    if (!explicit_rank_.empty()) {
      auto it = explicit_rank_[w].find(man);
      if (it != explicit_rank_[w].end()) rank = it->second;
    }
    return {rank, RandomTape(spec_.seed).word({"wprio", w, man})};
  }

  InstanceSpec spec_;
  AdjacencyOracle prefs_;
  std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> explicit_rank_;
};

struct ManStatus {
  enum class Kind : std::uint8_t { matched, unmatched, disqualified };
  Kind kind = Kind::unmatched;
  std::uint32_t woman = kNone;

  static ManStatus matched(std::uint32_t w) { return {Kind::matched, w}; }
  static ManStatus unmatched() { return {Kind::unmatched, kNone}; }
  static ManStatus disqualified() { return {Kind::disqualified, kNone}; }

  bool is_matched() const noexcept { return kind == Kind::matched; }

  friend bool operator==(const ManStatus&, const ManStatus&) = default;
};

inline std::string to_string(const ManStatus& s) {
  switch (s.kind) {
    case ManStatus::Kind::matched: return "matched";
    case ManStatus::Kind::unmatched: return "unmatched";
    case ManStatus::Kind::disqualified: return "disqualified";
  }
  return "?";
}

// Per-round counters. `exhausted` is cumulative (D_i); the others refer to
// round `round` only, except `matched` which is the matching size after it.
struct RoundStats {
  std::uint32_t round = 0;
  std::uint64_t rejected = 0;     // R_i
  std::uint64_t continuing = 0;   // C_i: rejected with list entries left
  std::uint64_t exhausted = 0;    // D_i
  std::uint64_t matched = 0;      // M_i
};

struct GsResult {
  std::vector<ManStatus> status;
  std::vector<RoundStats> rounds;
  std::uint64_t exhausted_before_start = 0;  // D_0: men with empty lists

  std::uint64_t matched_count() const {
    return static_cast<std::uint64_t>(
        std::count_if(status.begin(), status.end(), [](const ManStatus& s) { return s.is_matched(); }));
  }
};

namespace detail {

// Simultaneous-round deferred acceptance over compact ids. `lists[m]` holds
// compact woman ids in preference order; `prefers(w, a, b)` compares compact
// men. Stops after `max_rounds` rounds (men rejected in the last round are
// disqualified) or at quiescence.
template <class Prefers>
GsResult simulate_rounds(const std::vector<std::span<const std::uint32_t>>& lists, std::uint32_t women,
                         std::optional<std::uint32_t> max_rounds, Prefers&& prefers) {
  const auto men = static_cast<std::uint32_t>(lists.size());
  GsResult out;
  out.status.assign(men, ManStatus::unmatched());
  std::vector<std::uint32_t> next(men, 0);
  std::vector<std::uint32_t> holder(women, kNone);
  std::vector<std::uint32_t> active;
  active.reserve(men);
  for (std::uint32_t m = 0; m < men; ++m) {
    if (lists[m].empty()) {
      ++out.exhausted_before_start;
    } else {
      active.push_back(m);
    }
  }
  std::uint64_t exhausted = out.exhausted_before_start;
  std::uint64_t matched = 0;
  std::vector<std::uint32_t> rejected;
  std::vector<std::uint32_t> next_active;
  for (std::uint32_t round = 1; !active.empty(); ++round) {
    if (max_rounds && round > *max_rounds) break;
    rejected.clear();
    for (std::uint32_t m : active) {
      const std::uint32_t w = lists[m][next[m]++];
      const std::uint32_t h = holder[w];
      if (h == kNone) {
        holder[w] = m;
        ++matched;
      } else if (prefers(w, m, h)) {
        holder[w] = m;
        rejected.push_back(h);
      } else {
        rejected.push_back(m);
      }
    }
    const bool last = max_rounds && round == *max_rounds;
    RoundStats stats;
    stats.round = round;
    stats.rejected = rejected.size();
    next_active.clear();
    for (std::uint32_t m : rejected) {
      const bool done = next[m] == lists[m].size();
      if (done) {
        ++exhausted;
      } else {
        ++stats.continuing;
      }
      if (last) {
        out.status[m] = ManStatus::disqualified();
      } else if (done) {
        out.status[m] = ManStatus::unmatched();
      } else {
        next_active.push_back(m);
      }
    }
    stats.exhausted = exhausted;
    stats.matched = matched;
    out.rounds.push_back(stats);
    std::sort(next_active.begin(), next_active.end());
    active.swap(next_active);
  }
  for (std::uint32_t w = 0; w < women; ++w) {
    if (holder[w] != kNone) out.status[holder[w]] = ManStatus::matched(w);
  }
  return out;
}

inline GsResult run(const MatchingInstance& inst, std::optional<std::uint32_t> max_rounds) {
  std::vector<std::span<const std::uint32_t>> lists(inst.men());
  for (std::uint32_t m = 0; m < inst.men(); ++m) lists[m] = inst.oracle().forward(m);
  return simulate_rounds(lists, inst.women(), max_rounds,
                         [&](std::uint32_t w, std::uint32_t a, std::uint32_t b) { return inst.prefers(w, a, b); });
}

}  // namespace detail

// Runs deferred acceptance to quiescence. Never reports Disqualified.
inline GsResult global_gs(const MatchingInstance& inst) { return detail::run(inst, std::nullopt); }

// Deferred acceptance stopped after `rounds` rounds.
inline GsResult abridged_gs(const MatchingInstance& inst, std::uint32_t rounds) {
  if (rounds < 1) throw std::invalid_argument("abridged_gs: rounds must be >= 1");
  return detail::run(inst, rounds);
}

// Default truncation for list length k.
constexpr std::uint32_t default_rounds(std::uint32_t k) noexcept { return 2 * k * k; }

// Round count that drives C_l below eps * M*:
// k + 1 + ceil(k (1 + 1/eps) ln(2 k^2 / eps)).
inline std::uint32_t rounds_for_epsilon(std::uint32_t k, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("rounds_for_epsilon: eps must be > 0");
  if (k < 1) throw std::invalid_argument("rounds_for_epsilon: k must be >= 1");
  const double kk = static_cast<double>(k);
  const double tail = kk * (1.0 + 1.0 / eps) * std::log(2.0 * kk * kk / eps);
  return k + 1 + static_cast<std::uint32_t>(std::ceil(tail));
}

// Pairs (man, woman) that block `status`. Disqualified men never block.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> blocking_pairs(const MatchingInstance& inst,
                                                                           std::span<const ManStatus> status) {
  if (status.size() != inst.men()) throw std::invalid_argument("blocking_pairs: status size mismatch");
  std::vector<std::uint32_t> partner(inst.women(), kNone);
  for (std::uint32_t m = 0; m < inst.men(); ++m) {
    if (!status[m].is_matched()) continue;
    const auto w = status[m].woman;
    if (w >= inst.women()) throw std::invalid_argument("blocking_pairs: unknown woman");
    if (partner[w] != kNone) throw std::invalid_argument("blocking_pairs: matching is not injective over women");
    partner[w] = m;
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t m = 0; m < inst.men(); ++m) {
    if (status[m].kind == ManStatus::Kind::disqualified) continue;
    for (std::uint32_t w : inst.oracle().forward(m)) {
      if (status[m].is_matched() && w == status[m].woman) break;
      const auto h = partner[w];
      if (h == kNone || inst.prefers(w, m, h)) out.emplace_back(m, w);
    }
  }
  return out;
}

enum class LocalEngine {
  // Simulates the truncated run on the 2l-ball around the queried man.
  neighborhood,
  // Lazily resolves proposal/rejection rounds, visiting only men who outrank
  // a queried man at one of his women.
  query_tree,
};

namespace detail {

inline ManStatus local_neighborhood(const MatchingInstance& inst, std::uint32_t rounds, std::uint32_t man,
                                    ProbeCache& cache) {
  // BFS over men at even distance up to 2l. Women at odd distance are
  // expanded through their reverse lists.
  const std::uint32_t radius = 2 * rounds;
  std::unordered_map<std::uint32_t, std::uint32_t> man_index;  // global -> compact
  std::unordered_map<std::uint32_t, std::uint32_t> woman_index;
  std::vector<std::uint32_t> men_global;
  std::vector<std::uint32_t> frontier{man};
  man_index.emplace(man, 0);
  men_global.push_back(man);
  for (std::uint32_t dist = 0; dist < radius && !frontier.empty(); dist += 2) {
    std::vector<std::uint32_t> next_frontier;
    for (std::uint32_t m : frontier) {
      for (std::uint32_t w : cache.forward(m)) {
        if (!woman_index.emplace(w, static_cast<std::uint32_t>(woman_index.size())).second) continue;
        for (std::uint32_t other : cache.reverse(w)) {
          if (man_index.emplace(other, static_cast<std::uint32_t>(men_global.size())).second) {
            men_global.push_back(other);
            next_frontier.push_back(other);
          }
        }
      }
    }
    frontier.swap(next_frontier);
  }
  // Men on the outer ring still propose; their lists are read here.
  std::vector<std::vector<std::uint32_t>> compact_lists(men_global.size());
  std::vector<std::uint32_t> women_global(woman_index.size());
  for (auto [g, c] : woman_index) women_global[c] = g;
  for (std::size_t c = 0; c < men_global.size(); ++c) {
    for (std::uint32_t w : cache.forward(men_global[c])) {
      auto [it, inserted] = woman_index.emplace(w, static_cast<std::uint32_t>(woman_index.size()));
      if (inserted) women_global.push_back(w);
      compact_lists[c].push_back(it->second);
    }
  }
  std::vector<std::span<const std::uint32_t>> spans(compact_lists.begin(), compact_lists.end());
  auto sim = simulate_rounds(spans, static_cast<std::uint32_t>(women_global.size()), rounds,
                             [&](std::uint32_t w, std::uint32_t a, std::uint32_t b) {
                               return inst.prefers(women_global[w], men_global[a], men_global[b]);
                             });
  ManStatus s = sim.status[0];
  if (s.is_matched()) s.woman = women_global[s.woman];
  return s;
}

// Lazy evaluation of the truncated run. P(m, j) is the round in which man m
// proposes to his j-th woman; T(m, j) the round in which she rejects him.
//   P(m, 0) = 1,  P(m, j) = T(m, j-1) + 1
//   T(m, j) = max(P(m, j), min over men m' she prefers to m of P(m', idx))
// Every value above `rounds` is "never". Each P -> T step lowers the cap by
// one, so the recursion is finite even when preference cycles exist.
class QueryTreeGs {
 public:
  QueryTreeGs(const MatchingInstance& inst, std::uint32_t rounds, ProbeCache& cache)
      : inst_(inst), rounds_(rounds), never_(rounds + 1), cache_(cache) {}

  ManStatus status(std::uint32_t man) {
    const auto list = cache_.forward(man);
    for (std::uint32_t j = 0; j < list.size(); ++j) {
      const std::uint32_t t = reject_round(man, j, rounds_);
      if (t == never_) return ManStatus::matched(list[j]);
      if (t == rounds_) return ManStatus::disqualified();
    }
    return ManStatus::unmatched();
  }

 private:
  struct Memo {
    std::uint32_t exact = 0;        // 0 = unknown
    std::uint32_t above = 0;        // known P > above
  };

  static std::uint64_t key(std::uint32_t man, std::uint32_t j) { return (std::uint64_t{man} << 32) | j; }

  std::uint32_t propose_round(std::uint32_t man, std::uint32_t j, std::uint32_t cap) {
    if (cap < 1) return never_;
    if (j == 0) return 1;
    Memo& memo = memo_[key(man, j)];
    if (memo.exact != 0) return memo.exact <= cap ? memo.exact : never_;
    if (cap <= memo.above) return never_;
    const std::uint32_t t = reject_round(man, j - 1, cap - 1);
    Memo& after = memo_[key(man, j)];
    if (t == never_) {
      after.above = std::max(after.above, cap);
      return never_;
    }
    after.exact = t + 1;
    return t + 1;
  }

  std::uint32_t reject_round(std::uint32_t man, std::uint32_t j, std::uint32_t cap) {
    const std::uint32_t p = propose_round(man, j, cap);
    if (p == never_) return never_;
    const std::uint32_t w = cache_.forward(man)[j];
    // Cheap pass first: a rival there by round p settles it at p.
    for (std::uint32_t other : cache_.reverse(w)) {
      if (other == man || !inst_.prefers(w, other, man)) continue;
      const auto other_list = cache_.forward(other);
      const auto idx = static_cast<std::uint32_t>(std::find(other_list.begin(), other_list.end(), w) -
                                                  other_list.begin());
      if (propose_round(other, idx, std::min(cap, p)) <= p) return p;
    }
    std::uint32_t best = never_;
    for (std::uint32_t other : cache_.reverse(w)) {
      if (other == man || !inst_.prefers(w, other, man)) continue;
      const std::uint32_t limit = std::min(cap, best - 1);
      if (limit < 1) break;
      const auto other_list = cache_.forward(other);
      const auto idx = static_cast<std::uint32_t>(std::find(other_list.begin(), other_list.end(), w) -
                                                  other_list.begin());
      const std::uint32_t a = propose_round(other, idx, limit);
      if (a < best) best = a;
      if (best <= p) return p;
    }
    return best == never_ ? never_ : std::max(p, best);
  }

  const MatchingInstance& inst_;
  std::uint32_t rounds_;
  std::uint32_t never_;
  ProbeCache& cache_;
  std::unordered_map<std::uint64_t, Memo> memo_;
};

}  // namespace detail

// Status of `man` after `rounds` rounds of the truncated run, computed from
// local probes only. Both engines return abridged_gs's answer.
inline ManStatus local_ags(const MatchingInstance& inst, std::uint32_t rounds, std::uint32_t man,
                           ProbeCounter& counter, LocalEngine engine = LocalEngine::neighborhood) {
  if (rounds < 1) throw std::invalid_argument("local_ags: rounds must be >= 1");
  if (man >= inst.men()) throw std::invalid_argument("local_ags: unknown man");
  ProbeCache cache(inst.oracle(), counter);
  if (engine == LocalEngine::neighborhood) return detail::local_neighborhood(inst, rounds, man, cache);
  detail::QueryTreeGs qt(inst, rounds, cache);
  return qt.status(man);
}

// Woman-side answer: the unique man in her reverse list whose local answer
// names her, if any.
inline std::optional<std::uint32_t> local_ags_woman(const MatchingInstance& inst, std::uint32_t rounds,
                                                    std::uint32_t woman, ProbeCounter& counter,
                                                    LocalEngine engine = LocalEngine::neighborhood) {
  if (woman >= inst.women()) throw std::invalid_argument("local_ags_woman: unknown woman");
  for (std::uint32_t man : inst.oracle().reverse(woman, counter)) {
    const auto s = local_ags(inst, rounds, man, counter, engine);
    if (s.is_matched() && s.woman == woman) return man;
  }
  return std::nullopt;
}

}  // namespace lcmd::matching
