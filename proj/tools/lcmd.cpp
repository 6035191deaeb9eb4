// lcmd: generate instances, answer local queries, check invariants and
// benchmark probe counts.

#include <CLI11.hpp>

#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lcmd/harness.hpp"
#include "lcmd/json_io.hpp"

using namespace lcmd;
using json = nlohmann::json;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Shared instance flags; --config wins over the individual values.
struct InstanceFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::uint32_t n = 100;
  std::optional<std::uint32_t> m;
  std::uint32_t k = 3;
  std::uint32_t d = 2;
  std::string bids;
  std::string sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "instance JSON file");
    app->add_option("--seed", seed, "instance seed");
    app->add_option("--n", n, "agents / machines / men / buyers")->check(CLI::PositiveNumber);
    app->add_option("--m", m, "items / jobs / women (default n)")->check(CLI::PositiveNumber);
    app->add_option("--k", k, "list length")->check(CLI::PositiveNumber);
    app->add_option("--d", d, "choices per job / houses per agent")->check(CLI::PositiveNumber);
  }

  io::InstanceFile build(Family f) const {
    if (!config.empty()) {
      auto file = io::load_instance(config);
      if (file.family != f && !(is_auction(f) && is_auction(file.family))) {
        throw UsageError("config family " + std::string(family_name(file.family)) + " does not match " +
                         std::string(family_name(f)));
      }
      return file;
    }
    io::InstanceFile file;
    file.family = f;
    file.seed = seed;
    file.n = n;
    file.m = m.value_or(n);
    file.k = k;
    file.d = d;
    if (!bids.empty()) {
      if (is_auction(f)) {
        file.valuations = std::vector<Rational>{};
        for (const auto& tok : split(bids)) file.valuations->push_back(io::decimal_rational(std::stod(tok)));
      } else {
        file.bids = std::vector<std::int64_t>{};
        for (const auto& tok : split(bids)) file.bids->push_back(std::stoll(tok));
        file.n = static_cast<std::uint32_t>(file.bids->size());
      }
    }
    if (!sets.empty()) {
      std::ifstream in(sets);
      if (!in) throw UsageError("cannot open " + sets);
      json j = json::parse(in);
      std::vector<std::vector<std::uint32_t>> lists = j.get<std::vector<std::vector<std::uint32_t>>>();
      file.n = static_cast<std::uint32_t>(lists.size());
      file.edges = io::to_edges(lists);
    }
    return file;
  }

  static bool is_auction(Family f) { return f == Family::uduv || f == Family::udubv || f == Family::ksmb; }

  static std::vector<std::string> split(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    for (std::string tok; std::getline(ss, tok, ',');) {
      if (!tok.empty()) out.push_back(tok);
    }
    return out;
  }
};

std::vector<std::uint32_t> parse_grid(const std::string& text) {
  std::vector<std::uint32_t> out;
  for (const auto& tok : InstanceFlags::split(text)) {
    const auto v = std::stoll(tok);
    if (v < 1) throw UsageError("grid values must be >= 1");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

std::string timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Writes to `path`, or stdout when empty.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  fn(out);
}

json status_json(std::uint32_t man, const matching::ManStatus& s, std::uint64_t probes) {
  json j{{"man", man}, {"status", to_string(s)}, {"probes", probes}};
  if (s.is_matched()) j["woman"] = s.woman;
  return j;
}

json rational_json(const Rational& r) { return to_string(r); }

// ---- run ---------------------------------------------------------------------

int run_matching(const io::InstanceFile& f, std::uint32_t rounds, std::optional<std::uint32_t> man,
                 matching::LocalEngine engine) {
  const auto inst = io::make_matching(f);
  if (rounds == 0) rounds = matching::default_rounds(inst.spec().k_or_d);
  if (man) {
    ProbeCounter c;
    const auto s = matching::local_ags(inst, rounds, *man, c, engine);
    std::cout << status_json(*man, s, c.probes()).dump() << '\n';
    return 0;
  }
  const auto global = matching::abridged_gs(inst, rounds);
  json all = json::array();
  bool consistent = true;
  for (std::uint32_t i = 0; i < inst.men(); ++i) {
    ProbeCounter c;
    const auto s = matching::local_ags(inst, rounds, i, c, engine);
    consistent = consistent && s == global.status[i];
    all.push_back(status_json(i, s, c.probes()));
  }
  std::cout << json{{"answers", all}, {"consistent", consistent}}.dump() << '\n';
  return consistent ? 0 : 1;
}

int run_scheduling(const io::InstanceFile& f, std::optional<std::uint32_t> job, std::optional<std::uint32_t> pay,
                   const std::string& scheme_name) {
  using namespace scheduling;
  const auto inst = io::make_scheduling(f);
  const bool std_mode = inst.mode() == Mode::standard;
  auto local = [&](std::uint32_t j, ProbeCounter& c) { return std_mode ? slms_local(inst, j, c) : rlms_local(inst, j, c); };
  auto machine_json = [](std::uint32_t i) { return i == kUnassigned ? json(nullptr) : json(i); };
  if (pay) {
    PaymentRecord rec;
    if (scheme_name == "expected") {
      if (!std_mode) throw UsageError("expected payments need --mode std");
      rec = payment_slms_expected(inst, *pay);
    } else if (scheme_name == "sampled") {
      if (!std_mode) throw UsageError("sampled payments need --mode std");
      rec = payment_slms_sampled_draw(inst, *pay, 0);
    } else if (scheme_name == "rerun") {
      if (std_mode) throw UsageError("rerun payments need --mode res");
      rec = payment_rlms(inst, *pay);
    } else {
      throw UsageError("unknown scheme " + scheme_name);
    }
    std::cout << json{{"machine", rec.machine}, {"payment", rational_json(rec.payment)},
                      {"scheme", std::string(scheduling::scheme_name(rec.scheme))}}
                     .dump()
              << '\n';
    return 0;
  }
  if (job) {
    ProbeCounter c;
    const auto i = local(*job, c);
    std::cout << json{{"job", *job}, {"machine", machine_json(i)}, {"probes", c.probes()}}.dump() << '\n';
    return 0;
  }
  const auto order = arrival_order(inst);
  const auto global = std_mode ? slms_online(inst, order) : rlms_online(inst, order);
  json all = json::array();
  bool consistent = true;
  for (std::uint32_t j = 0; j < inst.m(); ++j) {
    ProbeCounter c;
    const auto i = local(j, c);
    consistent = consistent && i == global.assign[j];
    all.push_back({{"job", j}, {"machine", machine_json(i)}, {"probes", c.probes()}});
  }
  std::cout << json{{"answers", all}, {"heights", global.heights}, {"consistent", consistent}}.dump() << '\n';
  return consistent ? 0 : 1;
}

int run_auction(const io::InstanceFile& f, std::optional<std::uint32_t> buyer, std::optional<std::uint32_t> item,
                bool audit) {
  using namespace auctions;
  const auto inst = io::make_auction(f);
  if (inst.load_factor() > 8) std::cerr << "warning: k n / m = " << inst.load_factor() << " is high\n";
  const bool uduv = inst.mode() == AuctionMode::uduv;
  auto buyer_json = [](std::uint32_t b) { return b == kNoBuyer ? json(nullptr) : json(b); };
  if (buyer) {
    ProbeCounter c;
    const auto ans = uduv ? uduv_local_buyer(inst, *buyer, c) : bid_greedy_local(inst, *buyer, c);
    std::cout << json{{"buyer", *buyer}, {"award", ans.award}, {"payment", rational_json(ans.payment)},
                      {"probes", c.probes()}}
                     .dump()
              << '\n';
    return 0;
  }
  if (item) {
    ProbeCounter c;
    const auto h = uduv ? uduv_local_item(inst, *item, c) : bid_greedy_local_item(inst, *item, c);
    std::cout << json{{"item", *item}, {"buyer", buyer_json(h)}, {"probes", c.probes()}}.dump() << '\n';
    return 0;
  }
  const auto out = mechanism_for(inst.mode())(inst, {});
  json awards = json::array(), payments = json::array(), probes = json::array();
  bool consistent = true;
  for (std::uint32_t i = 0; i < inst.n(); ++i) {
    ProbeCounter c;
    const auto ans = uduv ? uduv_local_buyer(inst, i, c) : bid_greedy_local(inst, i, c);
    consistent = consistent && ans.award == out.award[i] && ans.payment == out.payment[i];
    awards.push_back(ans.award);
    payments.push_back(rational_json(ans.payment));
    probes.push_back(c.probes());
  }
  json result{{"awards", awards}, {"payments", payments}, {"probes", probes}, {"consistent", consistent}};
  int code = consistent ? 0 : 1;
  if (audit) {
    const auto v = truthfulness_audit(inst, mechanism_for(inst.mode()), DeviationGrid::standard(inst.mode()));
    json rows = json::array();
    for (const auto& x : v) {
      rows.push_back({{"buyer", x.buyer}, {"deviation", x.deviation}, {"truthful", rational_json(x.truthful_utility)},
                      {"deviant", rational_json(x.deviant_utility)}});
    }
    result["violations"] = rows;
    if (!v.empty()) code = 1;
  }
  std::cout << result.dump() << '\n';
  return code;
}

int run_rsd(const io::InstanceFile& f, std::optional<std::uint32_t> agent) {
  const auto inst = io::make_housing(f);
  auto house_json = [](std::uint32_t h) { return h == rsd::kNoHouse ? json(nullptr) : json(h); };
  if (agent) {
    ProbeCounter c;
    const auto h = rsd::rsd_local(inst, *agent, c);
    std::cout << json{{"agent", *agent}, {"house", house_json(h)}, {"probes", c.probes()}}.dump() << '\n';
    return 0;
  }
  const auto global = rsd::rsd_global(inst);
  json all = json::array();
  bool consistent = true;
  for (std::uint32_t a = 0; a < inst.n(); ++a) {
    ProbeCounter c;
    const auto h = rsd::rsd_local(inst, a, c);
    consistent = consistent && h == global[a];
    all.push_back({{"agent", a}, {"house", house_json(h)}, {"probes", c.probes()}});
  }
  std::cout << json{{"answers", all}, {"consistent", consistent}}.dump() << '\n';
  return consistent ? 0 : 1;
}

// Single local query on any family; left-side id unless --item is given.
json one_query(const io::InstanceFile& f, std::uint32_t id, bool item, std::uint32_t rounds) {
  ProbeCounter c;
  json answer;
  switch (f.family) {
    case Family::matching: {
      const auto inst = io::make_matching(f);
      if (!rounds) rounds = matching::default_rounds(inst.spec().k_or_d);
      if (item) {
        const auto man = matching::local_ags_woman(inst, rounds, id, c, matching::LocalEngine::query_tree);
        answer = man ? json(*man) : json(nullptr);
      } else {
        const auto s = matching::local_ags(inst, rounds, id, c, matching::LocalEngine::query_tree);
        answer = {{"status", to_string(s)}};
        if (s.is_matched()) answer["woman"] = s.woman;
      }
      break;
    }
    case Family::scheduling_std:
    case Family::scheduling_res: {
      const auto inst = io::make_scheduling(f);
      const auto i = inst.mode() == scheduling::Mode::standard ? scheduling::slms_local(inst, id, c)
                                                               : scheduling::rlms_local(inst, id, c);
      answer = i == scheduling::kUnassigned ? json(nullptr) : json(i);
      break;
    }
    case Family::uduv:
    case Family::udubv:
    case Family::ksmb: {
      const auto inst = io::make_auction(f);
      const bool uduv = f.family == Family::uduv;
      if (item) {
        const auto b = uduv ? auctions::uduv_local_item(inst, id, c) : auctions::bid_greedy_local_item(inst, id, c);
        answer = b == auctions::kNoBuyer ? json(nullptr) : json(b);
      } else {
        const auto a = uduv ? auctions::uduv_local_buyer(inst, id, c) : auctions::bid_greedy_local(inst, id, c);
        answer = {{"award", a.award}, {"payment", rational_json(a.payment)}};
      }
      break;
    }
    case Family::housing: {
      const auto h = rsd::rsd_local(io::make_housing(f), id, c);
      answer = h == rsd::kNoHouse ? json(nullptr) : json(h);
      break;
    }
  }
  return {{"family", std::string(family_name(f.family))}, {"id", id}, {"answer", answer}, {"probes", c.probes()}};
}

Family run_family(const std::string& what, const std::string& mode) {
  if (what == "matching") return Family::matching;
  if (what == "scheduling") {
    if (mode == "std") return Family::scheduling_std;
    if (mode == "res") return Family::scheduling_res;
    throw UsageError("scheduling --mode must be std or res");
  }
  if (what == "auction") {
    if (mode == "uduv" || mode == "udubv" || mode == "ksmb") return parse_family(mode);
    throw UsageError("auction --mode must be uduv, udubv or ksmb");
  }
  if (what == "rsd") return Family::housing;
  return parse_family(what);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lcmd: local computation mechanisms"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a fully materialized instance file");
  std::string gen_family, gen_out;
  InstanceFlags gen_flags;
  gen->add_option("family", gen_family, "matching|scheduling-std|scheduling-res|uduv|udubv|ksmb|housing")->required();
  gen_flags.attach(gen);
  gen->add_option("--bids", gen_flags.bids, "comma-separated bids or valuations");
  gen->add_option("--out,-o", gen_out, "output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "answer local queries");
  std::string run_what, run_mode, scheme = "rerun";
  InstanceFlags run_flags;
  std::uint32_t rounds = 0;
  std::optional<std::uint32_t> q_man, q_job, q_pay, q_buyer, q_item, q_agent;
  bool all = false, audit = false;
  std::string engine_name = "query-tree";
  run->add_option("what", run_what, "matching|scheduling|auction|rsd")->required();
  run_flags.attach(run);
  run->add_option("--mode", run_mode, "std|res for scheduling, uduv|udubv|ksmb for auctions");
  run->add_option("--rounds", rounds, "truncation rounds (default 2k^2)");
  run->add_option("--engine", engine_name, "query-tree|neighborhood")->check(CLI::IsMember({"query-tree", "neighborhood"}));
  run->add_option("--bids", run_flags.bids, "comma-separated bids or valuations");
  run->add_option("--sets", run_flags.sets, "JSON file with one item list per buyer");
  run->add_option("--query-man", q_man);
  run->add_option("--query-job", q_job);
  run->add_option("--pay-machine", q_pay);
  run->add_option("--scheme", scheme)->check(CLI::IsMember({"expected", "sampled", "rerun"}));
  run->add_option("--query-buyer", q_buyer);
  run->add_option("--query-item", q_item);
  run->add_option("--query-agent", q_agent);
  run->add_flag("--all", all, "answer every entity and check against the global run");
  run->add_flag("--audit", audit, "run the truthfulness audit");

  // query
  auto* query = app.add_subcommand("query", "one local query, JSON out");
  std::string query_family;
  InstanceFlags query_flags;
  std::uint32_t query_id = 0;
  bool query_item = false;
  std::uint32_t query_rounds = 0;
  query->add_option("family", query_family, "family (omit with --config)");
  query_flags.attach(query);
  query->add_option("--id", query_id, "entity id")->required();
  query->add_flag("--item", query_item, "query the right-hand side (woman / item)");
  query->add_option("--rounds", query_rounds);

  // verify / bench share the experiment flags
  harness::ExperimentConfig vcfg, bcfg;
  std::string v_suite, v_grid = "300", v_out, v_viol;
  bool v_sample = false;
  auto* verify = app.add_subcommand("verify", "check invariants, CSV of name,instances,violations");
  verify->add_option("suite", v_suite, "matching|scheduling|scheduling-std|scheduling-res|uduv|udubv|ksmb|rsd|majorization")
      ->required();
  verify->add_option("--n", v_grid, "comma-separated n grid");
  verify->add_option("--seeds", vcfg.seeds)->check(CLI::PositiveNumber);
  verify->add_option("--seed", vcfg.base_seed, "first seed");
  verify->add_option("--k", vcfg.k)->check(CLI::PositiveNumber);
  verify->add_option("--d", vcfg.d)->check(CLI::PositiveNumber);
  verify->add_option("--rounds", vcfg.rounds);
  verify->add_option("--m-ratio", vcfg.m_per_n, "m = n * ratio");
  verify->add_option("--out,-o", v_out);
  verify->add_option("--violations", v_viol, "per-violation CSV");
  verify->add_flag("--sample", v_sample, "sample local queries instead of querying everyone");

  std::string b_family, b_grid = "256,1024,4096", b_out, b_summary;
  auto* bench = app.add_subcommand("bench", "probe counts per query, CSV");
  bench->add_option("family", b_family, "matching|scheduling-std|scheduling-res|uduv|udubv|ksmb|rsd")->required();
  bench->add_option("--n", b_grid);
  bench->add_option("--seeds", bcfg.seeds)->check(CLI::PositiveNumber);
  bench->add_option("--seed", bcfg.base_seed);
  bench->add_option("--queries", bcfg.queries)->check(CLI::PositiveNumber);
  bench->add_option("--k", bcfg.k)->check(CLI::PositiveNumber);
  bench->add_option("--d", bcfg.d)->check(CLI::PositiveNumber);
  bench->add_option("--rounds", bcfg.rounds);
  bench->add_option("--m-ratio", bcfg.m_per_n);
  bench->add_option("--engine", engine_name)->check(CLI::IsMember({"query-tree", "neighborhood"}));
  bench->add_option("--out,-o", b_out);
  bench->add_option("--summary", b_summary, "summary CSV (default stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto engine =
      engine_name == "neighborhood" ? matching::LocalEngine::neighborhood : matching::LocalEngine::query_tree;
  try {
    if (*gen) {
      const auto file = io::materialize(gen_flags.build(harness::family_alias(gen_family)));
      emit(gen_out, [&](std::ostream& out) { out << io::to_json(file).dump() << '\n'; });
      return 0;
    }
    if (*run) {
      const auto family = run_family(run_what, run_mode);
      const auto file = run_flags.build(family);
      switch (file.family) {
        case Family::matching: return run_matching(file, rounds, all ? std::nullopt : q_man, engine);
        case Family::scheduling_std:
        case Family::scheduling_res: return run_scheduling(file, all ? std::nullopt : q_job, q_pay, scheme);
        case Family::uduv:
        case Family::udubv:
        case Family::ksmb:
          return run_auction(file, all ? std::nullopt : q_buyer, all ? std::nullopt : q_item, audit);
        case Family::housing: return run_rsd(file, all ? std::nullopt : q_agent);
      }
    }
    if (*query) {
      io::InstanceFile file;
      if (!query_flags.config.empty()) {
        file = io::load_instance(query_flags.config);
      } else {
        if (query_family.empty()) throw UsageError("query needs a family or --config");
        file = query_flags.build(harness::family_alias(query_family));
      }
      std::cout << one_query(file, query_id, query_item, query_rounds).dump() << '\n';
      return 0;
    }
    if (*verify) {
      vcfg.n_grid = parse_grid(v_grid);
      const auto suite = harness::parse_suite(v_suite);
      const auto tally = harness::verify(suite, vcfg, !v_sample);
      emit(v_out, [&](std::ostream& out) {
        out << "# lcmd verify " << v_suite << " " << timestamp() << '\n';
        harness::write_verify_csv(out, tally);
      });
      if (!v_viol.empty()) emit(v_viol, [&](std::ostream& out) { harness::write_violation_csv(out, tally); });
      return tally.total_violations() == 0 ? 0 : 1;
    }
    if (*bench) {
      bcfg.n_grid = parse_grid(b_grid);
      bcfg.family = harness::family_alias(b_family);
      bcfg.engine = engine;
      const auto rows = harness::bench(bcfg);
      emit(b_out, [&](std::ostream& out) {
        out << "# lcmd bench " << b_family << " " << timestamp() << '\n';
        harness::write_bench_csv(out, rows);
      });
      const auto fit = harness::fit_growth(rows);
      if (b_summary.empty()) {
        harness::write_summary_csv(std::cerr, std::string(family_name(bcfg.family)), fit);
      } else {
        emit(b_summary, [&](std::ostream& out) { harness::write_summary_csv(out, std::string(family_name(bcfg.family)), fit); });
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
