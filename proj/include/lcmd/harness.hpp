#pragma once

// Experiment driver shared by the CLI and the acceptance binary: invariant
// suites, probe benchmarks, growth fits and CSV emission.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lcmd/auctions.hpp"
#include "lcmd/instance.hpp"
#include "lcmd/oracles.hpp"
#include "lcmd/rsd.hpp"
#include "lcmd/scheduling.hpp"
#include "lcmd/stable_matching.hpp"

namespace lcmd::harness {

// ---- threading ---------------------------------------------------------------

// LCMD_THREADS if set to a positive integer, else the hardware count.
inline unsigned thread_count() {
  if (const char* env = std::getenv("LCMD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, count). Callers write results into slot i, so the
// output order never depends on scheduling.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(failure_lock);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---- configuration -------------------------------------------------------------

// Samples per coupling profile and seed; n plays no role there.
inline constexpr std::uint64_t kMajorizationTrials = 10000;

struct ExperimentConfig {
  Family family = Family::matching;
  std::vector<std::uint32_t> n_grid{300};
  std::uint32_t seeds = 10;
  std::uint64_t base_seed = 0;
  std::uint32_t queries = 100;
  std::uint32_t k = 3;
  std::uint32_t d = 2;
  std::uint32_t rounds = 0;  // 0: 2k^2
  double m_per_n = 1.0;      // m = max(1, round(n * m_per_n))
  matching::LocalEngine engine = matching::LocalEngine::query_tree;

  std::uint32_t rounds_or_default() const { return rounds ? rounds : matching::default_rounds(k); }
  std::uint32_t m_for(std::uint32_t n) const {
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::llround(n * m_per_n)));
  }
  std::uint64_t seed(std::uint32_t s) const { return base_seed + s; }

  void validate() const {
    if (n_grid.empty()) throw std::invalid_argument("config: n grid must be nonempty");
    if (seeds < 1) throw std::invalid_argument("config: seeds must be >= 1");
    if (k < 1 || d < 1) throw std::invalid_argument("config: k and d must be >= 1");
    if (!(m_per_n > 0)) throw std::invalid_argument("config: m/n must be positive");
    for (auto n : n_grid) {
      if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    }
  }
};

inline std::uint64_t digest(std::string_view text) { return fnv1a(text); }

inline std::string hex(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) out[i] = digits[x & 15];
  return out;
}

// ---- invariant suites ------------------------------------------------------------

struct VerifyRow {
  std::string name;
  std::uint64_t instances = 0;
  std::uint64_t violations = 0;
};

struct ViolationDetail {
  std::string name;
  std::uint64_t seed = 0;
  std::string detail;
};

// Accumulates rows by invariant name in first-seen order.
class Tally {
 public:
  void add(const std::string& name, std::uint64_t instances, std::uint64_t violations) {
    auto [it, fresh] = index_.emplace(name, rows_.size());
    if (fresh) rows_.push_back({name, 0, 0});
    rows_[it->second].instances += instances;
    rows_[it->second].violations += violations;
  }
  // One instance, passing or not; failures keep a detail line.
  void check(const std::string& name, std::uint64_t seed, bool ok, const std::string& detail = {}) {
    add(name, 1, ok ? 0 : 1);
    if (!ok) details_.push_back({name, seed, detail});
  }
  void merge(const Tally& other) {
    for (const auto& r : other.rows_) add(r.name, r.instances, r.violations);
    details_.insert(details_.end(), other.details_.begin(), other.details_.end());
  }

  const std::vector<VerifyRow>& rows() const noexcept { return rows_; }
  const std::vector<ViolationDetail>& details() const noexcept { return details_; }
  std::uint64_t total_violations() const {
    std::uint64_t t = 0;
    for (const auto& r : rows_) t += r.violations;
    return t;
  }

 private:
  std::vector<VerifyRow> rows_;
  std::map<std::string, std::size_t> index_;
  std::vector<ViolationDetail> details_;
};

// Small restricted instance with 1..max_n machines, 1..max_m jobs, bids in
// [1, max_bid], two choices per job and a random tie-break permutation.
inline scheduling::SchedulingInstance small_restricted(std::uint64_t seed, std::uint32_t max_n, std::uint32_t max_m,
                                                       std::int64_t max_bid) {
  RandomTape tape(seed);
  const auto n = 1 + static_cast<std::uint32_t>(tape.uniform({"t-n", 0, 0}, max_n));
  const auto m = 1 + static_cast<std::uint32_t>(tape.uniform({"t-m", 0, 0}, max_m));
  std::vector<std::int64_t> bids(n);
  for (std::uint32_t i = 0; i < n; ++i) bids[i] = 1 + static_cast<std::int64_t>(tape.uniform({"t-b", i, 0}, max_bid));
  std::vector<std::vector<std::uint32_t>> sets(m);
  for (std::uint32_t j = 0; j < m; ++j) {
    for (std::uint64_t c = 0; c < 2; ++c) sets[j].push_back(static_cast<std::uint32_t>(tape.uniform({"t-s", j, c}, n)));
  }
  std::vector<std::uint32_t> pi(n);
  std::iota(pi.begin(), pi.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i) std::swap(pi[i - 1], pi[tape.uniform({"t-pi", i, 0}, i)]);
  return scheduling::SchedulingInstance::restricted(bids, sets, pi, seed, 2);
}

namespace checks {

inline InstanceSpec spec_of(Family f, std::uint64_t seed, std::uint32_t n, std::uint32_t m, std::uint32_t k_or_d) {
  return InstanceSpec{seed, n, m, k_or_d, f};
}

// -- matching --

inline void matching_seed(Tally& t, std::uint64_t seed, std::uint32_t n, std::uint32_t k, std::uint32_t rounds,
                          bool exhaustive_local) {
  using namespace matching;
  const auto inst = MatchingInstance::seeded(spec_of(Family::matching, seed, n, n, k));
  const auto full = global_gs(inst);
  const auto cut = abridged_gs(inst, rounds);
  t.check("gs_stable", seed, blocking_pairs(inst, full.status).empty());

  std::uint64_t bad_identity = 0, bad_monotone = 0, bad_bound = 0;
  for (const auto* run : {&full, &cut}) {
    std::uint64_t prev_d = run->exhausted_before_start, prev_r = std::numeric_limits<std::uint64_t>::max();
    for (const auto& r : run->rounds) {
      bad_identity += r.rejected != r.continuing + r.exhausted - prev_d;
      bad_monotone += r.rejected > prev_r;
      bad_bound += r.rejected * r.round > std::uint64_t{n} * k;
      prev_d = r.exhausted;
      prev_r = r.rejected;
    }
  }
  t.check("round_identity", seed, bad_identity == 0);
  t.check("rejections_nonincreasing", seed, bad_monotone == 0);
  t.check("round_rejection_bound", seed, bad_bound == 0, std::to_string(bad_bound) + " rounds over nk/i");

  const double mstar = static_cast<double>(full.matched_count());
  const double ml = static_cast<double>(cut.matched_count());
  t.check("truncation_additive", seed, ml >= mstar - static_cast<double>(std::uint64_t{n} * k) / rounds);
  const double unmatched = static_cast<double>(n - cut.matched_count()) / n;
  t.check("unmatched_fraction", seed, unmatched <= 4.0 / k + 0.02, std::to_string(unmatched));

  // Local answers: every man when exhaustive, else a keyed sample.
  RandomTape tape(seed);
  const std::uint32_t count = exhaustive_local ? n : std::min<std::uint32_t>(n, 200);
  std::uint64_t mismatches = 0;
  for (std::uint32_t q = 0; q < count; ++q) {
    const auto man = exhaustive_local ? q : static_cast<std::uint32_t>(tape.uniform({"vq", q, 0}, n));
    ProbeCounter c;
    mismatches += !(local_ags(inst, rounds, man, c, LocalEngine::query_tree) == cut.status[man]);
  }
  t.add("local_global_query_tree", 1, mismatches ? 1 : 0);
  std::uint64_t nb_mismatch = 0;
  for (std::uint32_t q = 0; q < std::min<std::uint32_t>(n, 20); ++q) {
    const auto man = static_cast<std::uint32_t>(tape.uniform({"vn", q, 0}, n));
    ProbeCounter c;
    nb_mismatch += !(local_ags(inst, rounds, man, c, LocalEngine::neighborhood) == cut.status[man]);
  }
  t.add("local_global_neighborhood", 1, nb_mismatch ? 1 : 0);
}

// -- scheduling --

inline void scheduling_res_seed(Tally& t, std::uint64_t seed, std::uint32_t n, std::uint32_t m, std::uint32_t d,
                                bool exhaustive_local) {
  using namespace scheduling;
  const auto inst = SchedulingInstance::seeded(spec_of(Family::scheduling_res, seed, n, m, d));
  const auto global = rlms_online(inst, arrival_order(inst));
  std::uint64_t infeasible = 0;
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    const auto i = global.assign[j];
    const auto choices = inst.machine_choices(j);
    if (i == kUnassigned || std::find(choices.begin(), choices.end(), i) == choices.end()) ++infeasible;
  }
  t.check("assignment_feasible", seed, infeasible == 0);
  std::uint64_t mismatches = 0;
  RandomTape tape(seed);
  const std::uint32_t count = exhaustive_local ? inst.m() : std::min<std::uint32_t>(inst.m(), 200);
  for (std::uint32_t q = 0; q < count; ++q) {
    const auto j = exhaustive_local ? q : static_cast<std::uint32_t>(tape.uniform({"vq", q, 0}, inst.m()));
    ProbeCounter c;
    mismatches += rlms_local(inst, j, c) != global.assign[j];
  }
  t.check("local_global", seed, mismatches == 0, std::to_string(mismatches) + " jobs differ");

  // Small random scripts: monotone traces, truthful rerun payments, VP.
  const auto small = small_restricted(seed, 8, 40, 6);
  std::uint64_t trace_bad = 0;
  for (std::uint32_t i = 0; i < small.n(); ++i) {
    for (std::int64_t b = 1; b <= 6; ++b) {
      for (std::int64_t bp = b + 1; bp <= 6; ++bp) trace_bad += trace_violations(monotonicity_trace(small, i, b, bp), i);
    }
  }
  t.check("monotone_trace", seed, trace_bad == 0, std::to_string(trace_bad) + " trace entries");

  const auto five = small_restricted(seed ^ 0x5bd1e995, 5, 20, 6);
  const auto alloc = rlms_online(five);
  std::uint64_t gains = 0, negative = 0;
  for (std::uint32_t i = 0; i < five.n(); ++i) {
    const auto c = five.bids()[i];
    const auto truthful = machine_utility(payment_rlms(five, i).payment, alloc.heights[i], c, c);
    negative += truthful < 0;
    for (std::int64_t x = 0; x <= 2 * c; ++x) {
      auto dev = five.with_bid(i, x);
      gains += machine_utility(payment_rlms(dev, i).payment, rlms_online(dev).heights[i], x, c) > truthful;
    }
  }
  t.check("rerun_payment_truthful", seed, gains == 0, std::to_string(gains) + " profitable bids");
  t.check("voluntary_participation", seed, negative == 0);
}

inline void scheduling_std_seed(Tally& t, std::uint64_t seed, std::uint32_t n, std::uint32_t m, std::uint32_t d,
                                bool exhaustive_local) {
  using namespace scheduling;
  const auto inst = SchedulingInstance::seeded(spec_of(Family::scheduling_std, seed, n, m, d));
  const auto global = slms_online(inst, arrival_order(inst));
  std::uint64_t mismatches = 0;
  RandomTape tape(seed);
  const std::uint32_t count = exhaustive_local ? inst.m() : std::min<std::uint32_t>(inst.m(), 200);
  for (std::uint32_t q = 0; q < count; ++q) {
    const auto j = exhaustive_local ? q : static_cast<std::uint32_t>(tape.uniform({"vq", q, 0}, inst.m()));
    ProbeCounter c;
    mismatches += slms_local(inst, j, c) != global.assign[j];
  }
  t.check("local_global", seed, mismatches == 0, std::to_string(mismatches) + " jobs differ");

  // Closed form vs the average of the sampled scheme, and the expected
  // utility peak at the true capacity.
  std::uint64_t sampled_bad = 0, peak_bad = 0;
  for (std::uint32_t i = 0; i < std::min<std::uint32_t>(inst.n(), 4); ++i) {
    const auto b = inst.bids()[i];
    Rational sum = 0;
    for (std::int64_t k = 1; k <= b; ++k) sum += payment_slms_sampled(inst, i, k).payment;
    sampled_bad += sum / b != payment_slms_expected(inst, i).payment;
    const auto rest = scheduling::detail::others(inst, i);
    auto util = [&](std::int64_t x) {
      return slms_expected_payment(x, rest, inst.m()) - expected_height(x, rest, inst.m()) * x * x / b;
    };
    for (std::int64_t x = 1; x <= 3 * b; ++x) peak_bad += util(x) > util(b);
  }
  t.check("sampled_mean_is_closed_form", seed, sampled_bad == 0);
  t.check("expected_utility_peaks_at_truth", seed, peak_bad == 0);
}

// -- auctions --

inline auctions::AuctionInstance auction(Family f, std::uint64_t seed, std::uint32_t n, std::uint32_t m,
                                         std::uint32_t k) {
  return auctions::AuctionInstance::seeded(spec_of(f, seed, n, m, std::min(k, m)));
}

inline std::uint64_t feasibility_errors(const auctions::AuctionInstance& inst, const auctions::Outcome& out) {
  std::uint64_t bad = 0;
  std::set<std::uint32_t> used;
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    for (auto j : out.award[i]) bad += !used.insert(j).second;
    if (!out.won(i)) {
      bad += out.payment[i] != 0;
      continue;
    }
    bad += out.payment[i] < 0;
    const auto& want = inst.set(i);
    if (inst.mode() == auctions::AuctionMode::ksmb) {
      auto sorted = want;
      std::sort(sorted.begin(), sorted.end());
      bad += out.award[i] != sorted;
    } else {
      bad += out.award[i].size() != 1 || std::find(want.begin(), want.end(), out.award[i][0]) == want.end();
    }
  }
  return bad;
}

inline bool auction_local_matches(const auctions::AuctionInstance& inst, const auctions::Outcome& out) {
  using namespace auctions;
  std::vector<std::uint32_t> holder(inst.m(), kNoBuyer);
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    for (auto j : out.award[i]) holder[j] = i;
  }
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    ProbeCounter c;
    const auto ans = inst.mode() == AuctionMode::uduv ? uduv_local_buyer(inst, i, c) : bid_greedy_local(inst, i, c);
    if (ans.award != out.award[i] || ans.payment != out.payment[i]) return false;
  }
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    ProbeCounter c;
    const auto h = inst.mode() == AuctionMode::uduv ? uduv_local_item(inst, j, c) : bid_greedy_local_item(inst, j, c);
    if (h != holder[j]) return false;
  }
  return true;
}

// Greedy against the exact optimum: 1/2 for matchings, 1/k for packings.
// Packing needs n <= 20.
inline bool auction_ratio_ok(const auctions::AuctionInstance& inst, const auctions::Outcome& out) {
  using namespace auctions;
  if (inst.mode() == AuctionMode::uduv) {
    std::uint64_t winners = 0;
    for (std::uint32_t i = 0; i < inst.n(); ++i) winners += out.won(i);
    return 2 * winners >= oracles::max_matching(inst.sets(), inst.m());
  }
  if (inst.mode() == AuctionMode::udubv) {
    // Scale to integers by the common denominator; Hungarian on rationals is too slow at n = 1000.
    BigInt den = 1;
    for (const auto& v : inst.values()) den = boost::multiprecision::lcm(den, denominator(v));
    BigInt top = 0;
    for (const auto& v : inst.values()) top = std::max(top, numerator(v) * (den / denominator(v)));
    if (top * inst.n() < BigInt(std::numeric_limits<std::int64_t>::max() / 4)) {
      std::vector<oracles::WeightedEdge<std::int64_t>> edges;
      for (std::uint32_t i = 0; i < inst.n(); ++i) {
        const auto w = static_cast<std::int64_t>(numerator(inst.value(i)) * (den / denominator(inst.value(i))));
        for (auto j : inst.set(i)) edges.push_back({i, j, w});
      }
      const auto best = oracles::max_weight_matching<std::int64_t>(inst.n(), inst.m(), edges);
      return 2 * welfare_by_bids(inst, out) * Rational(den) >= Rational(BigInt(best));
    }
    std::vector<oracles::WeightedEdge<Rational>> edges;
    for (std::uint32_t i = 0; i < inst.n(); ++i) {
      for (auto j : inst.set(i)) edges.push_back({i, j, inst.value(i)});
    }
    return 2 * welfare_by_bids(inst, out) >= oracles::max_weight_matching<Rational>(inst.n(), inst.m(), edges);
  }
  return Rational(inst.k()) * welfare_by_bids(inst, out) >= oracles::optimal_packing(inst.sets(), inst.values());
}

// Winners still win at payment + eps and lose at payment - eps.
inline std::uint64_t critical_errors(const auctions::AuctionInstance& inst, const auctions::Outcome& out) {
  using namespace auctions;
  const Rational eps = make_rational(1, 1000);
  const auto mech = mechanism_for(inst.mode());
  std::uint64_t bad = 0;
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    if (!out.won(i)) continue;
    ReportOverlay up;
    up.bids[i] = out.payment[i] + eps;
    bad += !mech(inst, up).won(i);
    if (out.payment[i] >= eps) {
      ReportOverlay down;
      down.bids[i] = out.payment[i] - eps;
      bad += mech(inst, down).won(i);
    }
  }
  return bad;
}

inline void auction_seed(Tally& t, Family f, std::uint64_t seed, std::uint32_t n, std::uint32_t m, std::uint32_t k) {
  using namespace auctions;
  const auto inst = auction(f, seed, n, m, k);
  const auto mech = mechanism_for(inst.mode());
  const auto out = mech(inst, {});
  t.check("allocation_feasible", seed, feasibility_errors(inst, out) == 0);
  t.check("local_global", seed, auction_local_matches(inst, out));
  std::uint64_t negative = 0;
  for (std::uint32_t i = 0; i < inst.n(); ++i) negative += utility(inst, out, i) < 0;
  t.check("voluntary_participation", seed, negative == 0);
  if (inst.mode() != AuctionMode::ksmb || inst.n() <= oracles::kPackingLimit) {
    t.check("approximation_exact", seed, auction_ratio_ok(inst, out));
  }
  // Small companions for the exact packing ratio and the audits.
  RandomTape tape(seed);
  const auto sn = 1 + static_cast<std::uint32_t>(tape.uniform({"a-n", 0, 0}, 5));
  const auto sm = 1 + static_cast<std::uint32_t>(tape.uniform({"a-m", 0, 0}, 8));
  const auto sk = std::min<std::uint32_t>(sm, 1 + static_cast<std::uint32_t>(tape.uniform({"a-k", 0, 0}, 2)));
  const auto small = auction(f, seed, sn, sm, sk);
  const auto small_out = mech(small, {});
  if (inst.mode() == AuctionMode::ksmb) {
    const auto pn = 1 + static_cast<std::uint32_t>(tape.uniform({"a-p", 0, 0}, oracles::kPackingLimit));
    const auto packing = auction(f, seed, pn, 12, 3);
    t.check("approximation_exact", seed, auction_ratio_ok(packing, mech(packing, {})));
  }
  if (inst.mode() != AuctionMode::uduv) {
    t.check("critical_payment", seed, critical_errors(inst.n() <= 60 ? inst : small, inst.n() <= 60 ? out : small_out) == 0);
  }
  const auto v = truthfulness_audit(small, mech, DeviationGrid::standard(inst.mode()));
  t.check("truthfulness_audit", seed, v.empty(), v.empty() ? "" : "buyer " + std::to_string(v.front().buyer) + " " + v.front().deviation);
}

// -- housing --

inline void rsd_seed(Tally& t, std::uint64_t seed, std::uint32_t n, std::uint32_t d) {
  using namespace rsd;
  const auto inst = HousingInstance::seeded(seed, n, std::min(d, n));
  const auto global = rsd_global(inst);
  std::set<std::uint32_t> used;
  std::uint64_t repeats = 0;
  for (auto h : global) {
    if (h != kNoHouse) repeats += !used.insert(h).second;
  }
  t.check("house_injective", seed, repeats == 0);
  std::uint64_t forward_bad = 0, backward_bad = 0;
  for (std::uint32_t a = 0; a < inst.n(); ++a) {
    ProbeCounter c;
    forward_bad += rsd_local(inst, a, c) != global[a];
  }
  for (std::uint32_t a = inst.n(); a-- > 0;) {
    ProbeCounter c;
    backward_bad += rsd_local(inst, a, c) != global[a];
  }
  t.check("local_global", seed, forward_bad == 0, std::to_string(forward_bad) + " agents differ");
  t.check("query_order_independent", seed, backward_bad == 0);
}

// -- majorization --

inline void majorization_seed(Tally& t, std::uint64_t seed, std::uint64_t trials) {
  for (const auto& caps : std::vector<std::vector<std::int64_t>>{{2, 3}, {1, 1, 4}, {4, 8, 36}}) {
    const auto total = std::accumulate(caps.begin(), caps.end(), std::int64_t{0});
    const auto rep = oracles::uniform_majorizes_nonuniform(caps, static_cast<std::uint64_t>(2 * total), trials, seed);
    std::string name = "coupling_";
    for (std::size_t i = 0; i < caps.size(); ++i) name += (i ? "-" : "") + std::to_string(caps[i]);
    t.add(name, rep.trials, rep.violations + rep.max_load_violations);
  }
  RandomTape tape(seed);
  std::uint64_t bad = 0, tried = 0;
  for (std::uint64_t s = 0; s < trials; ++s) {
    // Random Q, P = Q plus transfers towards the front keeps P majorizing Q.
    const auto len = 1 + tape.uniform({"ms-len", s, 0}, 6);
    std::vector<std::int64_t> q(len);
    for (std::uint64_t x = 0; x < len; ++x) q[x] = static_cast<std::int64_t>(tape.uniform({"ms-q", s, x}, 5));
    std::sort(q.rbegin(), q.rend());
    auto p = q;
    const auto moves = tape.uniform({"ms-moves", s, 0}, 4);
    for (std::uint64_t mv = 0; mv < moves; ++mv) {
      const auto from = tape.uniform({"ms-from", s, mv}, len);
      if (p[from] == 0) continue;
      const auto to = tape.uniform({"ms-to", s, mv}, from + 1);
      --p[from];
      ++p[to];
    }
    if (!oracles::majorizes(p, q)) continue;
    const auto j = 1 + tape.uniform({"ms-j", s, 0}, len);
    const auto i = 1 + tape.uniform({"ms-i", s, 0}, j);
    ++tried;
    bad += !oracles::majorization_step_check(p, q, i, j);
  }
  t.add("step_check", tried, bad);
}

}  // namespace checks

// Family names plus the short forms "rsd" and "scheduling" (restricted).
inline Family family_alias(std::string_view s) {
  if (s == "rsd") return Family::housing;
  if (s == "scheduling") return Family::scheduling_res;
  return parse_family(s);
}

enum class Suite { matching, scheduling_std, scheduling_res, uduv, udubv, ksmb, housing, majorization };

inline Suite parse_suite(std::string_view s) {
  if (s == "majorization") return Suite::majorization;
  if (s == "scheduling") return Suite::scheduling_res;
  if (s == "rsd") return Suite::housing;
  switch (parse_family(s)) {
    case Family::matching: return Suite::matching;
    case Family::scheduling_std: return Suite::scheduling_std;
    case Family::scheduling_res: return Suite::scheduling_res;
    case Family::uduv: return Suite::uduv;
    case Family::udubv: return Suite::udubv;
    case Family::ksmb: return Suite::ksmb;
    case Family::housing: return Suite::housing;
  }
  throw std::invalid_argument("unknown suite");
}

// Runs one suite over every (n, seed) cell; rows come out in (n, seed) order.
inline Tally verify(Suite suite, const ExperimentConfig& cfg, bool exhaustive_local = true) {
  cfg.validate();
  const std::size_t cells = cfg.n_grid.size() * cfg.seeds;
  std::vector<Tally> parts(cells);
  parallel_for(cells, [&](std::size_t c) {
    const auto n = cfg.n_grid[c / cfg.seeds];
    const auto seed = cfg.seed(static_cast<std::uint32_t>(c % cfg.seeds));
    const auto m = cfg.m_for(n);
    auto& t = parts[c];
    switch (suite) {
      case Suite::matching: checks::matching_seed(t, seed, n, cfg.k, cfg.rounds_or_default(), exhaustive_local); break;
      case Suite::scheduling_res: checks::scheduling_res_seed(t, seed, n, m, cfg.d, exhaustive_local); break;
      case Suite::scheduling_std: checks::scheduling_std_seed(t, seed, n, m, cfg.d, exhaustive_local); break;
      case Suite::uduv: checks::auction_seed(t, Family::uduv, seed, n, m, cfg.k); break;
      case Suite::udubv: checks::auction_seed(t, Family::udubv, seed, n, m, cfg.k); break;
      case Suite::ksmb: checks::auction_seed(t, Family::ksmb, seed, n, m, cfg.k); break;
      case Suite::housing: checks::rsd_seed(t, seed, n, cfg.d); break;
      case Suite::majorization: checks::majorization_seed(t, seed, kMajorizationTrials); break;
    }
  });
  Tally all;
  for (const auto& p : parts) all.merge(p);
  return all;
}

inline void write_verify_csv(std::ostream& out, const Tally& t) {
  out << "name,instances,violations\n";
  for (const auto& r : t.rows()) out << r.name << ',' << r.instances << ',' << r.violations << '\n';
}

inline void write_violation_csv(std::ostream& out, const Tally& t) {
  if (t.details().empty()) return;
  out << "name,seed,detail\n";
  for (const auto& d : t.details()) out << d.name << ',' << d.seed << ',' << d.detail << '\n';
}

// ---- probe benchmark ------------------------------------------------------------

struct BenchRecord {
  std::string family;
  std::uint32_t n = 0;
  std::uint64_t seed = 0;
  std::uint32_t query = 0;   // index within the cell
  std::uint32_t entity = 0;  // queried id
  std::uint64_t probes = 0;
  double wall_us = 0;        // not written to the CSV body
  std::string digest;
};

namespace detail {

// Local query for `entity`; returns (probes, answer text).
class Querier {
 public:
  Querier(Family f, const ExperimentConfig& cfg, std::uint64_t seed, std::uint32_t n) : family_(f), cfg_(cfg) {
    const auto m = cfg.m_for(n);
    switch (f) {
      case Family::matching:
        matching_ = matching::MatchingInstance::seeded({seed, n, n, cfg.k, f});
        count_ = n;
        break;
      case Family::scheduling_std:
      case Family::scheduling_res:
        sched_ = scheduling::SchedulingInstance::seeded({seed, n, m, cfg.d, f});
        count_ = m;
        break;
      case Family::uduv:
      case Family::udubv:
      case Family::ksmb:
        auction_ = auctions::AuctionInstance::seeded({seed, n, m, std::min(cfg.k, m), f});
        count_ = n;
        break;
      case Family::housing:
        housing_ = rsd::HousingInstance::seeded(seed, n, std::min(cfg.d, n));
        count_ = n;
        break;
    }
  }

  std::uint32_t count() const noexcept { return count_; }

  std::string answer(std::uint32_t id, ProbeCounter& c) const {
    switch (family_) {
      case Family::matching: {
        const auto s = matching::local_ags(*matching_, cfg_.rounds_or_default(), id, c, cfg_.engine);
        return to_string(s) + ":" + std::to_string(s.woman);
      }
      case Family::scheduling_std: return std::to_string(scheduling::slms_local(*sched_, id, c));
      case Family::scheduling_res: return std::to_string(scheduling::rlms_local(*sched_, id, c));
      case Family::uduv:
      case Family::udubv:
      case Family::ksmb: {
        const auto a = family_ == Family::uduv ? auctions::uduv_local_buyer(*auction_, id, c)
                                               : auctions::bid_greedy_local(*auction_, id, c);
        std::string s = a.award.empty() ? "-" : "";
        for (auto j : a.award) s += std::to_string(j) + ".";
        return s + ":" + to_string(a.payment);
      }
      case Family::housing: return std::to_string(rsd::rsd_local(*housing_, id, c));
    }
    return {};
  }

 private:
  Family family_;
  const ExperimentConfig& cfg_;
  std::uint32_t count_ = 0;
  std::optional<matching::MatchingInstance> matching_;
  std::optional<scheduling::SchedulingInstance> sched_;
  std::optional<auctions::AuctionInstance> auction_;
  std::optional<rsd::HousingInstance> housing_;
};

}  // namespace detail

// `queries` uniformly drawn entities per (n, seed) cell, with replacement.
inline std::vector<BenchRecord> bench(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.queries < 1) throw std::invalid_argument("config: queries must be >= 1");
  const std::size_t cells = cfg.n_grid.size() * cfg.seeds;
  std::vector<std::vector<BenchRecord>> parts(cells);
  parallel_for(cells, [&](std::size_t c) {
    const auto n = cfg.n_grid[c / cfg.seeds];
    const auto seed = cfg.seed(static_cast<std::uint32_t>(c % cfg.seeds));
    detail::Querier q(cfg.family, cfg, seed, n);
    const RandomTape tape(seed);
    auto& out = parts[c];
    for (std::uint32_t i = 0; i < cfg.queries; ++i) {
      const auto id = static_cast<std::uint32_t>(tape.uniform({"bench-query", i, 0}, q.count()));
      ProbeCounter counter;
      const auto t0 = std::chrono::steady_clock::now();
      const auto ans = q.answer(id, counter);
      const auto t1 = std::chrono::steady_clock::now();
      out.push_back({std::string(family_name(cfg.family)), n, seed, i, id, counter.probes(),
                     std::chrono::duration<double, std::micro>(t1 - t0).count(), hex(digest(ans))});
    }
  });
  std::vector<BenchRecord> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << "family,n,seed,query,entity,probes,digest\n";
  for (const auto& r : rows) {
    out << r.family << ',' << r.n << ',' << r.seed << ',' << r.query << ',' << r.entity << ',' << r.probes << ','
        << r.digest << '\n';
  }
}

struct GrowthPoint {
  std::uint32_t n = 0;
  std::uint64_t queries = 0;
  double median = 0;
  double p99 = 0;
  std::uint64_t max = 0;
  double mean = 0;
};

struct GrowthFit {
  std::vector<GrowthPoint> points;
  double power_exponent = 0;  // slope of log max vs log n
  double log_power = 0;       // p in max ~ c log^p n
  double log_constant = 0;    // c in that fit
  double c_log1 = 0;          // least-squares c in max ~ c log n
};

inline double quantile(std::vector<std::uint64_t> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return static_cast<double>(v[std::min(idx, v.size() - 1)]);
}

// Least-squares slope and intercept of y on x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  if (k < 2) return {0, k ? y[0] : 0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = k * sxx - sx * sx;
  const double slope = den == 0 ? 0 : (k * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / k};
}

inline GrowthFit fit_growth(const std::vector<BenchRecord>& rows) {
  std::map<std::uint32_t, std::vector<std::uint64_t>> by_n;
  for (const auto& r : rows) by_n[r.n].push_back(r.probes);
  GrowthFit fit;
  std::vector<double> ln_n, lnln_n, ln_max, log_n, maxes;
  for (const auto& [n, probes] : by_n) {
    GrowthPoint p;
    p.n = n;
    p.queries = probes.size();
    p.median = quantile(probes, 0.5);
    p.p99 = quantile(probes, 0.99);
    p.max = *std::max_element(probes.begin(), probes.end());
    p.mean = static_cast<double>(std::accumulate(probes.begin(), probes.end(), std::uint64_t{0})) / probes.size();
    fit.points.push_back(p);
    if (n < 3) continue;  // log log n must be positive
    const double y = std::log(std::max<double>(1.0, static_cast<double>(p.max)));
    ln_n.push_back(std::log(static_cast<double>(n)));
    lnln_n.push_back(std::log(std::log(static_cast<double>(n))));
    ln_max.push_back(y);
    log_n.push_back(std::log(static_cast<double>(n)));
    maxes.push_back(static_cast<double>(p.max));
  }
  fit.power_exponent = linear_fit(ln_n, ln_max).first;
  const auto [p, lnc] = linear_fit(lnln_n, ln_max);
  fit.log_power = p;
  fit.log_constant = std::exp(lnc);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    num += maxes[i] * log_n[i];
    den += log_n[i] * log_n[i];
  }
  fit.c_log1 = den == 0 ? 0 : num / den;
  return fit;
}

inline void write_summary_csv(std::ostream& out, const std::string& family, const GrowthFit& fit) {
  out << "family,n,queries,median,p99,max,mean\n";
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const auto& p : fit.points) {
    out << family << ',' << p.n << ',' << p.queries << ',' << p.median << ',' << p.p99 << ',' << p.max << ','
        << p.mean << '\n';
  }
  out.precision(4);
  out << "# power_exponent," << fit.power_exponent << '\n';
  out << "# log_power," << fit.log_power << ",log_constant," << fit.log_constant << '\n';
  out << "# c_log_n," << fit.c_log1 << '\n';
  out.unsetf(std::ios::fixed);
}

}  // namespace lcmd::harness
