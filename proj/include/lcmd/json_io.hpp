#pragma once

// Instance files: {"seed", "family", "n", "m", "k", "d", "bids"?,
// "valuations"?, "explicit_edges"?}. Explicit data overrides seeded data.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcmd/auctions.hpp"
#include "lcmd/instance.hpp"
#include "lcmd/rational.hpp"
#include "lcmd/rsd.hpp"
#include "lcmd/scheduling.hpp"
#include "lcmd/stable_matching.hpp"

namespace lcmd::io {

using json = nlohmann::json;

struct InstanceFile {
  std::uint64_t seed = 0;
  Family family = Family::matching;
  std::uint32_t n = 1;
  std::uint32_t m = 1;
  std::uint32_t k = 1;
  std::uint32_t d = 2;
  std::optional<std::vector<std::int64_t>> bids;
  std::optional<std::vector<Rational>> valuations;
  std::optional<std::vector<std::pair<std::uint32_t, std::uint32_t>>> edges;

  // List length for matching and auctions, choice count otherwise.
  std::uint32_t k_or_d() const {
    switch (family) {
      case Family::matching:
      case Family::uduv:
      case Family::udubv:
      case Family::ksmb: return k;
      default: return d;
    }
  }

  InstanceSpec spec() const { return InstanceSpec{seed, n, m, k_or_d(), family}; }
};

// Exact rational for a JSON number: the shortest decimal that round-trips
// the double, read back as a fraction (0.1 -> 1/10).
inline Rational decimal_rational(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc()) throw std::invalid_argument("decimal_rational: cannot format number");
  std::string text(buf, res.ptr);
  if (text.find_first_of("eE") != std::string::npos || text.find_first_of("ni") != std::string::npos) {
    // exponent or non-finite: fall back to a fixed 12-digit scale
    if (!std::isfinite(x)) throw std::invalid_argument("decimal_rational: non-finite value");
    const double scale = 1e12;
    return Rational(BigInt(static_cast<long long>(std::llround(x * scale))), BigInt(static_cast<long long>(scale)));
  }
  bool neg = false;
  if (!text.empty() && text[0] == '-') {
    neg = true;
    text.erase(0, 1);
  }
  BigInt num = 0, den = 1;
  bool frac = false;
  for (char c : text) {
    if (c == '.') {
      frac = true;
      continue;
    }
    num = num * 10 + (c - '0');
    if (frac) den *= 10;
  }
  Rational r(num, den);
  return neg ? Rational(-r) : r;
}

inline InstanceFile parse_instance(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("instance: expected a JSON object");
  InstanceFile f;
  auto u32 = [&](const char* key, std::uint32_t fallback) -> std::uint32_t {
    if (!j.contains(key)) return fallback;
    const auto v = j.at(key).get<std::int64_t>();
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
      throw std::invalid_argument(std::string("instance: ") + key + " out of range");
    }
    return static_cast<std::uint32_t>(v);
  };
  try {
    if (!j.contains("family")) throw std::invalid_argument("instance: missing family");
    f.family = parse_family(j.at("family").get<std::string>());
    f.seed = j.value("seed", std::uint64_t{0});
    f.n = u32("n", 1);
    f.m = u32("m", f.family == Family::housing ? f.n : 1);
    f.k = u32("k", 1);
    f.d = u32("d", 2);
    if (j.contains("bids")) f.bids = j.at("bids").get<std::vector<std::int64_t>>();
    if (j.contains("valuations")) {
      std::vector<Rational> vals;
      for (const auto& v : j.at("valuations")) {
        vals.push_back(v.is_number_integer() ? make_rational(v.get<std::int64_t>()) : decimal_rational(v.get<double>()));
      }
      f.valuations = std::move(vals);
    }
    if (j.contains("explicit_edges")) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
      for (const auto& e : j.at("explicit_edges")) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("instance: edges must be [left, right] pairs");
        const auto l = e[0].get<std::int64_t>(), r = e[1].get<std::int64_t>();
        if (l < 0 || r < 0) throw std::invalid_argument("instance: negative edge endpoint");
        edges.emplace_back(static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(r));
      }
      f.edges = std::move(edges);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("instance: ") + e.what());
  }
  if (f.n < 1 || f.m < 1) throw std::invalid_argument("instance: n and m must be >= 1");
  return f;
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return parse_instance(j);
}

inline json to_json(const InstanceFile& f) {
  json j;
  j["seed"] = f.seed;
  j["family"] = std::string(family_name(f.family));
  j["n"] = f.n;
  j["m"] = f.m;
  j["k"] = f.k;
  j["d"] = f.d;
  if (f.bids) j["bids"] = *f.bids;
  if (f.valuations) {
    json vals = json::array();
    for (const auto& v : *f.valuations) {
      if (denominator(v) == 1) {
        vals.push_back(static_cast<std::int64_t>(numerator(v)));
      } else {
        vals.push_back(to_double(v));
      }
    }
    j["valuations"] = vals;
  }
  if (f.edges) {
    json edges = json::array();
    for (auto [l, r] : *f.edges) edges.push_back({l, r});
    j["explicit_edges"] = edges;
  }
  return j;
}

// Edges grouped into per-left lists, in file order.
inline std::vector<std::vector<std::uint32_t>> edge_lists(const InstanceFile& f, std::uint32_t left,
                                                          std::uint32_t right) {
  std::vector<std::vector<std::uint32_t>> lists(left);
  for (auto [l, r] : *f.edges) {
    if (l >= left || r >= right) throw std::invalid_argument("instance: edge endpoint out of range");
    lists[l].push_back(r);
  }
  return lists;
}

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> to_edges(const std::vector<std::vector<std::uint32_t>>& lists) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t l = 0; l < lists.size(); ++l) {
    for (auto r : lists[l]) out.emplace_back(l, r);
  }
  return out;
}

inline void expect_family(const InstanceFile& f, std::initializer_list<Family> ok, const char* what) {
  if (std::find(ok.begin(), ok.end(), f.family) == ok.end()) {
    throw std::invalid_argument(std::string(what) + ": family " + std::string(family_name(f.family)) + " does not fit");
  }
}

inline matching::MatchingInstance make_matching(const InstanceFile& f) {
  expect_family(f, {Family::matching}, "matching");
  if (f.edges) return matching::MatchingInstance::from_lists(f.m, edge_lists(f, f.n, f.m), {}, f.seed);
  return matching::MatchingInstance::seeded(f.spec());
}

// n machines, m jobs. Restricted edges are (job, machine); the standard
// setting derives slot choices from the seed and takes no edges.
inline scheduling::SchedulingInstance make_scheduling(const InstanceFile& f) {
  expect_family(f, {Family::scheduling_std, Family::scheduling_res}, "scheduling");
  if (f.bids && f.bids->size() != f.n) throw std::invalid_argument("scheduling: bids must list n machines");
  if (f.family == Family::scheduling_std) {
    if (f.edges) throw std::invalid_argument("scheduling-std: explicit_edges unsupported, slot choices come from the seed");
    auto bids = f.bids ? *f.bids : seeded_bids(f.spec());
    return scheduling::SchedulingInstance::standard(std::move(bids), f.m, f.d, f.seed);
  }
  if (f.edges) {
    auto bids = f.bids ? *f.bids : seeded_bids(f.spec());
    auto sets = edge_lists(f, f.m, f.n);
    std::uint32_t longest = 1;
    for (const auto& s : sets) longest = std::max<std::uint32_t>(longest, static_cast<std::uint32_t>(s.size()));
    return scheduling::SchedulingInstance::restricted(std::move(bids), std::move(sets), {}, f.seed,
                                                      std::max(f.d, longest));
  }
  if (f.bids) {
    auto oracle = build_instance(f.spec(), *f.bids);
    return scheduling::SchedulingInstance::restricted(*f.bids, oracle.forward_lists(), {}, f.seed, f.d);
  }
  return scheduling::SchedulingInstance::seeded(f.spec());
}

inline auctions::AuctionMode auction_mode(Family f) {
  switch (f) {
    case Family::uduv: return auctions::AuctionMode::uduv;
    case Family::udubv: return auctions::AuctionMode::udubv;
    case Family::ksmb: return auctions::AuctionMode::ksmb;
    default: throw std::invalid_argument("not an auction family: " + std::string(family_name(f)));
  }
}

inline auctions::AuctionInstance make_auction(const InstanceFile& f) {
  expect_family(f, {Family::uduv, Family::udubv, Family::ksmb}, "auction");
  if (!f.edges && !f.valuations) return auctions::AuctionInstance::seeded(f.spec());
  const auto mode = auction_mode(f.family);
  auto seeded = f.edges ? std::optional<auctions::AuctionInstance>() : auctions::AuctionInstance::seeded(f.spec());
  auto sets = f.edges ? edge_lists(f, f.n, f.m) : seeded->sets();
  std::vector<Rational> values;
  if (f.valuations) {
    if (f.valuations->size() != f.n) throw std::invalid_argument("auction: valuations must list n buyers");
    values = *f.valuations;
  } else if (seeded) {
    values = seeded->values();
  } else if (mode != auctions::AuctionMode::uduv) {
    InstanceSpec spec = f.spec();
    spec.k_or_d = 1;
    values = auctions::AuctionInstance::seeded(spec).values();
  }
  return auctions::AuctionInstance::from_sets(mode, f.m, std::move(sets), std::move(values), f.seed);
}

inline rsd::HousingInstance make_housing(const InstanceFile& f) {
  expect_family(f, {Family::housing}, "housing");
  if (f.edges) return rsd::HousingInstance::from_lists(edge_lists(f, f.n, f.m), f.seed, f.m);
  return rsd::HousingInstance::seeded(f.seed, f.n, f.d);
}

// The same instance with every seeded list and value written out.
inline InstanceFile materialize(const InstanceFile& f) {
  InstanceFile out = f;
  switch (f.family) {
    case Family::matching: out.edges = to_edges(make_matching(f).oracle().forward_lists()); break;
    case Family::scheduling_std: out.bids = make_scheduling(f).bids(); break;
    case Family::scheduling_res: {
      auto inst = make_scheduling(f);
      out.bids = inst.bids();
      out.edges = to_edges(inst.oracle().forward_lists());
      break;
    }
    case Family::uduv:
    case Family::udubv:
    case Family::ksmb: {
      auto inst = make_auction(f);
      out.edges = to_edges(inst.sets());
      if (f.family != Family::uduv) out.valuations = inst.values();
      break;
    }
    case Family::housing: {
      out.m = f.n;
      out.edges = to_edges(make_housing(f).oracle().forward_lists());
      break;
    }
  }
  return out;
}

}  // namespace lcmd::io
