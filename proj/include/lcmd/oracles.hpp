#pragma once

// Exact reference solvers and the slot-load / majorization toolkit.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <tuple>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lcmd/random_tape.hpp"
#include "lcmd/rational.hpp"

namespace lcmd::oracles {

// ---- majorization --------------------------------------------------------

template <class T>
std::vector<T> normalized(std::vector<T> v) {
  std::sort(v.begin(), v.end(), std::greater<T>());
  return v;
}

// Prefix-sum dominance of the sorted-descending copies, up to the shorter
// length. Inputs are taken by value and never touched.
template <class T>
bool majorizes(std::vector<T> p, std::vector<T> q) {
  p = normalized(std::move(p));
  q = normalized(std::move(q));
  const std::size_t len = std::min(p.size(), q.size());
  T sp{}, sq{};
  for (std::size_t i = 0; i < len; ++i) {
    sp += p[i];
    sq += q[i];
    if (sp < sq) return false;
  }
  return true;
}

// For P majorizing Q (equal length) and positions i <= j (1-based, in the
// normalized vectors): does normalize(P + e_i) majorize normalize(Q + e_j)?
inline bool majorization_step_check(std::vector<std::int64_t> p, std::vector<std::int64_t> q, std::size_t i,
                                    std::size_t j) {
  if (p.size() != q.size()) throw std::invalid_argument("majorization_step_check: length mismatch");
  if (i < 1 || j < 1 || i > p.size() || j > q.size()) {
    throw std::invalid_argument("majorization_step_check: position out of range");
  }
  if (i > j) throw std::invalid_argument("majorization_step_check: requires i <= j");
  p = normalized(std::move(p));
  q = normalized(std::move(q));
  if (!majorizes(p, q)) throw std::invalid_argument("majorization_step_check: P does not majorize Q");
  ++p[i - 1];
  ++q[j - 1];
  return majorizes(p, q);
}

// Machine with r jobs and c slots: r mod c slots of ceil(r/c), the rest
// floor(r/c). Machines are laid out in index order.
inline std::vector<std::int64_t> slot_load_vector(std::span<const std::int64_t> heights,
                                                  std::span<const std::int64_t> caps) {
  if (heights.size() != caps.size()) throw std::invalid_argument("slot_load_vector: size mismatch");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    const auto c = caps[i];
    const auto r = heights[i];
    if (c < 1) throw std::invalid_argument("slot_load_vector: capacities must be >= 1");
    if (r < 0) throw std::invalid_argument("slot_load_vector: negative height");
    for (std::int64_t s = 0; s < c; ++s) out.push_back(r / c + (s < r % c ? 1 : 0));
  }
  return out;
}

struct CouplingReport {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;           // samples where S^B failed to majorize S^A at some step
  std::uint64_t max_load_violations = 0;  // samples where max load of B fell below A's
  std::optional<std::uint64_t> first_bad_trial;

  bool ok() const noexcept { return violations == 0 && max_load_violations == 0; }
};

// Paired simulation of the floored allocator on machines with capacities
// `caps` (system A) and on C = sum(caps) unit machines (system B). Each job
// picks two positions k1 <= k2 in the normalized slot-load vectors; B puts it
// at k2, A compares the floored post-placement loads of the machines owning
// those slots and goes to k1's machine only when it is strictly lower.
inline CouplingReport uniform_majorizes_nonuniform(std::span<const std::int64_t> caps, std::uint64_t jobs,
                                                   std::uint64_t trials, std::uint64_t seed) {
  const std::int64_t total = std::accumulate(caps.begin(), caps.end(), std::int64_t{0});
  if (total < 1) throw std::invalid_argument("uniform_majorizes_nonuniform: zero capacity");
  for (auto c : caps) {
    if (c < 1) throw std::invalid_argument("uniform_majorizes_nonuniform: capacities must be >= 1");
  }
  const RandomTape tape(seed);
  const auto slots = static_cast<std::size_t>(total);
  CouplingReport rep;
  rep.trials = trials;
  std::vector<std::tuple<std::int64_t, std::uint32_t, std::int64_t>> keyed;
  keyed.reserve(slots);
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::vector<std::int64_t> hb(slots, 0);  // kept sorted descending
    std::vector<std::int64_t> ha(caps.size(), 0);
    bool bad = false, bad_max = false;
    for (std::uint64_t j = 0; j < jobs; ++j) {
      auto u1 = static_cast<std::size_t>(tape.uniform({"tau", t, 2 * j}, slots));
      auto u2 = static_cast<std::size_t>(tape.uniform({"tau", t, 2 * j + 1}, slots));
      const std::size_t k1 = std::min(u1, u2), k2 = std::max(u1, u2);

      // System B: add at k2 and restore order by moving the bumped entry up.
      ++hb[k2];
      for (std::size_t p = k2; p > 0 && hb[p] > hb[p - 1]; --p) std::swap(hb[p], hb[p - 1]);

      // System A: order slots by (load desc, machine, slot).
      keyed.clear();
      for (std::uint32_t i = 0; i < caps.size(); ++i) {
        for (std::int64_t s = 0; s < caps[i]; ++s) {
          const std::int64_t load = ha[i] / caps[i] + (s < ha[i] % caps[i] ? 1 : 0);
          keyed.emplace_back(-load, i, s);
        }
      }
      std::sort(keyed.begin(), keyed.end());
      const auto a = std::get<1>(keyed[k1]);
      const auto b = std::get<1>(keyed[k2]);
      const auto lp_a = (ha[a] + 1) / caps[a];
      const auto lp_b = (ha[b] + 1) / caps[b];
      ++ha[lp_a < lp_b ? a : b];

      if (!majorizes(hb, slot_load_vector(ha, caps))) bad = true;
      // Max load: B's tallest unit machine against A's max h/c.
      for (std::size_t i = 0; i < caps.size(); ++i) {
        if (hb.front() * caps[i] < ha[i]) bad_max = true;
      }
    }
    if (bad) ++rep.violations;
    if (bad_max) ++rep.max_load_violations;
    if ((bad || bad_max) && !rep.first_bad_trial) rep.first_bad_trial = t;
  }
  return rep;
}

// ---- matchings -----------------------------------------------------------

// Maximum bipartite matching by augmenting paths. `adj[l]` lists right ids.
inline std::size_t max_matching(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t right_count) {
  std::vector<std::uint32_t> match_r(right_count, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> stamp(right_count, 0);
  std::uint32_t epoch = 0;
  // Iterative DFS so deep augmenting paths cannot overflow the stack.
  auto augment = [&](std::uint32_t root) {
    ++epoch;
    struct Frame {
      std::uint32_t l;
      std::size_t next;
      std::uint32_t via;  // right vertex we reached l through
    };
    std::vector<Frame> stack{{root, 0, std::numeric_limits<std::uint32_t>::max()}};
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next == adj[f.l].size()) {
        stack.pop_back();
        continue;
      }
      const std::uint32_t r = adj[f.l][f.next++];
      if (r >= right_count) throw std::invalid_argument("max_matching: right id out of range");
      if (stamp[r] == epoch) continue;
      stamp[r] = epoch;
      if (match_r[r] == std::numeric_limits<std::uint32_t>::max()) {
        // Flip the path: each frame's left takes the right it is exploring.
        std::uint32_t take = r;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          const std::uint32_t prev = it->via;
          match_r[take] = it->l;
          take = prev;
        }
        return true;
      }
      stack.push_back({match_r[r], 0, r});
    }
    return false;
  };
  std::size_t size = 0;
  for (std::uint32_t l = 0; l < adj.size(); ++l) size += augment(l) ? 1 : 0;
  return size;
}

template <class T>
struct WeightedEdge {
  std::uint32_t left;
  std::uint32_t right;
  T weight;
};

// Maximum-weight bipartite matching (not necessarily perfect) with
// non-negative weights, via the Hungarian method on a padded square matrix.
// Exact for exact T.
template <class T>
T max_weight_matching(std::uint32_t left_count, std::uint32_t right_count, const std::vector<WeightedEdge<T>>& edges) {
  const std::size_t n = std::max<std::size_t>(left_count, right_count);
  if (n == 0) return T{0};
  // cost = -weight; missing pairs cost 0 (same as leaving both unmatched).
  std::vector<std::vector<T>> cost(n + 1, std::vector<T>(n + 1, T{0}));
  for (const auto& e : edges) {
    if (e.left >= left_count || e.right >= right_count) {
      throw std::invalid_argument("max_weight_matching: endpoint out of range");
    }
    if (e.weight < T{0}) throw std::invalid_argument("max_weight_matching: negative weight");
    auto& c = cost[e.left + 1][e.right + 1];
    c = std::min(c, T{0} - e.weight);
  }
  std::vector<T> u(n + 1, T{0}), v(n + 1, T{0});
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<T> minv(n + 1, T{0});
    std::vector<char> has(n + 1, 0), used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::optional<T> delta;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        T cur = cost[i0][j] - u[i0] - v[j];
        if (!has[j] || cur < minv[j]) {
          minv[j] = cur;
          has[j] = 1;
          way[j] = j0;
        }
        if (!delta || minv[j] < *delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += *delta;
          v[j] -= *delta;
        } else if (has[j]) {
          minv[j] -= *delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  T total{0};
  for (std::size_t j = 1; j <= n; ++j) total -= cost[p[j]][j];
  return total;
}

// ---- set packing -----------------------------------------------------------

inline constexpr std::size_t kPackingLimit = 20;

// Best total value of pairwise-disjoint sets. Exhaustive; refuses more than
// kPackingLimit sets.
inline Rational optimal_packing(const std::vector<std::vector<std::uint32_t>>& sets, const std::vector<Rational>& values) {
  if (sets.size() != values.size()) throw std::invalid_argument("optimal_packing: size mismatch");
  if (sets.size() > kPackingLimit) throw std::invalid_argument("optimal_packing: more than 20 sets");
  const std::size_t n = sets.size();
  std::vector<Rational> suffix(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + std::max(Rational(0), values[i]);
  std::set<std::uint32_t> used;
  Rational best = 0;
  std::function<void(std::size_t, Rational)> go = [&](std::size_t i, Rational acc) {
    if (acc > best) best = acc;
    if (i == n || acc + suffix[i] <= best) return;
    bool free = true;
    for (auto item : sets[i]) free = free && !used.count(item);
    if (free && values[i] > 0) {
      for (auto item : sets[i]) used.insert(item);
      go(i + 1, acc + values[i]);
      for (auto item : sets[i]) used.erase(item);
    }
    go(i + 1, acc);
  };
  go(0, 0);
  return best;
}

// ---- makespan -------------------------------------------------------------

namespace detail {

// Dinic max-flow on a small integral network.
class Dinic {
 public:
  explicit Dinic(std::size_t nodes) : g_(nodes), level_(nodes), it_(nodes) {}

  void add_edge(std::size_t a, std::size_t b, std::int64_t cap) {
    g_[a].push_back({b, g_[b].size(), cap});
    g_[b].push_back({a, g_[a].size() - 1, 0});
  }

  std::int64_t max_flow(std::size_t s, std::size_t t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) flow += f;
    }
    return flow;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    std::int64_t cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (const auto& e : g_[v]) {
        if (e.cap > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  // Job -> machine paths are length 3, so recursion depth is tiny.
  std::int64_t dfs(std::size_t v, std::size_t t, std::int64_t f) {
    if (v == t) return f;
    for (auto& i = it_[v]; i < g_[v].size(); ++i) {
      auto& e = g_[v][i];
      if (e.cap <= 0 || level_[e.to] != level_[v] + 1) continue;
      if (std::int64_t d = dfs(e.to, t, std::min(f, e.cap)); d > 0) {
        e.cap -= d;
        g_[e.to][e.rev].cap += d;
        return d;
      }
    }
    return 0;
  }

  std::vector<std::vector<Edge>> g_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

// Can every job be placed in its choice set with machine i taking at most
// `limit[i]` jobs?
inline bool restricted_feasible(const std::vector<std::vector<std::uint32_t>>& choices,
                                const std::vector<std::int64_t>& limit) {
  const std::size_t m = choices.size(), n = limit.size();
  const std::size_t src = m + n, sink = m + n + 1;
  Dinic net(m + n + 2);
  for (std::size_t j = 0; j < m; ++j) {
    net.add_edge(src, j, 1);
    std::vector<std::uint32_t> distinct(choices[j].begin(), choices[j].end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (auto i : distinct) net.add_edge(j, m + i, 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (limit[i] > 0) net.add_edge(m + i, sink, limit[i]);
  }
  return net.max_flow(src, sink) == static_cast<std::int64_t>(m);
}

}  // namespace detail

// Smallest T with sum floor(T c_i) >= m (any machine may take any job).
inline Rational optimal_makespan_standard(std::span<const std::int64_t> caps, std::int64_t jobs) {
  if (jobs < 0) throw std::invalid_argument("optimal_makespan: negative job count");
  if (jobs == 0) return 0;
  Rational best = -1;
  for (auto c : caps) {
    if (c < 0) throw std::invalid_argument("optimal_makespan: negative capacity");
    if (c == 0) continue;
    // Least h with sum_i floor(h c_i / c) >= jobs.
    std::int64_t lo = 1, hi = jobs;
    auto enough = [&](std::int64_t h) {
      std::int64_t s = 0;
      for (auto ci : caps) s += (h * ci) / c;
      return s >= jobs;
    };
    if (!enough(hi)) continue;
    while (lo < hi) {
      auto mid = lo + (hi - lo) / 2;
      if (enough(mid)) hi = mid; else lo = mid + 1;
    }
    Rational t = make_rational(lo, c);
    if (best < 0 || t < best) best = t;
  }
  if (best < 0) throw std::invalid_argument("optimal_makespan: zero total capacity");
  return best;
}

// Restricted assignment: minimal T such that a flow with machine i capped at
// floor(T c_i) places every job inside its choice set. T* = h / c for some
// capacity value c, so each distinct c gets its own binary search over h.
inline Rational optimal_makespan_restricted(std::span<const std::int64_t> caps,
                                            const std::vector<std::vector<std::uint32_t>>& choices) {
  const auto jobs = static_cast<std::int64_t>(choices.size());
  if (jobs == 0) return 0;
  for (const auto& cj : choices) {
    if (cj.empty()) throw std::invalid_argument("optimal_makespan: job with no machines");
    for (auto i : cj) {
      if (i >= caps.size()) throw std::invalid_argument("optimal_makespan: machine id out of range");
    }
  }
  std::vector<std::int64_t> distinct_caps;
  for (auto c : caps) {
    if (c < 0) throw std::invalid_argument("optimal_makespan: negative capacity");
    if (c > 0) distinct_caps.push_back(c);
  }
  std::sort(distinct_caps.begin(), distinct_caps.end());
  distinct_caps.erase(std::unique(distinct_caps.begin(), distinct_caps.end()), distinct_caps.end());
  std::optional<Rational> best;
  std::vector<std::int64_t> limit(caps.size());
  for (auto c : distinct_caps) {
    auto feasible = [&](std::int64_t h) {
      for (std::size_t i = 0; i < caps.size(); ++i) limit[i] = (h * caps[i]) / c;
      return detail::restricted_feasible(choices, limit);
    };
    std::int64_t hi = jobs;
    if (!feasible(hi)) continue;
    std::int64_t lo = 1;
    while (lo < hi) {
      auto mid = lo + (hi - lo) / 2;
      if (feasible(mid)) hi = mid; else lo = mid + 1;
    }
    Rational t = make_rational(lo, c);
    if (!best || t < *best) best = t;
  }
  if (!best) throw std::invalid_argument("optimal_makespan: infeasible (jobs only on zero-capacity machines)");
  return *best;
}

}  // namespace lcmd::oracles
