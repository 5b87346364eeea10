#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "pmsim/orchestrator.hpp"

using namespace pmsim;
namespace fs = std::filesystem;

namespace {

// Hand-built single-market universe: flat quotes (no noise, mid pinned at
// true_prob), known outcome, expiry on an exact cycle boundary.
Universe mini_universe(Outcome outcome, Micro mid, Micro half_spread,
                       std::int64_t t0, std::int64_t interval,
                       int expiry_cycle) {
  Universe u;
  u.seed = 1;
  u.params.n_markets = 1;
  u.params.t0 = t0;
  u.params.interval_secs = interval;
  u.params.noise = 0;
  u.params.half_spread = half_spread;
  SyntheticMarket m;
  m.spec.market_id = "KXTEST-0000";
  m.spec.series_id = "KXTEST";
  m.spec.category = Category::Weather;
  m.spec.title = "Test market";
  m.spec.settlement_rule = "Settles YES on the fixed schedule.";
  m.spec.listed_at = t0;
  m.spec.expiry = t0 + expiry_cycle * interval;
  m.spec.venue_mode = ShareRule::WholeShare;
  m.spec.tick = 10'000;
  m.spec.true_prob = mid;
  m.scheduled = {"KXTEST-0000", outcome, m.spec.expiry};
  QuoteTop q;
  q.market_id = m.spec.market_id;
  q.yes_bid = mid - half_spread;
  q.yes_ask = mid + half_spread;
  q.yes_bid_size = 50'000;
  q.yes_ask_size = 50'000;
  q.as_of = t0;
  u.quotes[m.spec.market_id] = derive_complement(q);
  u.mid[m.spec.market_id] = mid;
  u.markets.push_back(std::move(m));
  return u;
}

std::string write_fixture(const Universe& u, const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("pmsim_test_" + name + ".jsonl");
  save_universe(u, p.string());
  return p.string();
}

RunConfig base_config() {
  RunConfig cfg;
  cfg.seed = 7;
  cfg.n_cycles = 10;
  cfg.cycle_interval_secs = 1'800;
  cfg.universe_params.n_markets = 6;
  cfg.universe_params.horizon_cycles = 10;
  return cfg;
}

} // namespace

TEST_CASE("noop agents stay exactly at starting capital", "[orchestrator]") {
  RunConfig cfg = base_config();
  cfg.agents = {{"idle", "noop", json::object()}};
  RunResult res = run_arena(cfg);
  const AgentResult& ar = res.per_agent.at("idle");
  REQUIRE(ar.snapshots.size() == 10);
  for (const CycleSnapshot& s : ar.snapshots) {
    CHECK(s.account_value == cfg.starting_capital);
    CHECK(s.cash == cfg.starting_capital);
    CHECK(s.unrealized_pnl == 0);
    CHECK(s.trades_this_cycle == 0);
  }
  CHECK(ar.metrics.max_drawdown_cpp == 0);
  CHECK(ar.metrics.return_pct_cpp == 0);
}

TEST_CASE("six-step trace on a one-market fixture", "[orchestrator]") {
  // mid 45c, spread 10c: bid 40c / ask 50c, settles YES at cycle 1
  Universe u = mini_universe(Outcome::YES, 450'000, 50'000, 0, 1'800, 2);
  RunConfig cfg;
  cfg.seed = 3;
  cfg.n_cycles = 3;
  cfg.cycle_interval_secs = 1'800;
  cfg.universe_fixture = write_fixture(u, "six_step");
  cfg.agents = {{"seer", "oracle",
                 json{{"accuracy_ppm", 1'000'000}, {"qty_shares", 10}}}};

  std::ostringstream log_stream;
  RunResult res = run_arena(cfg, &log_stream);
  const AgentResult& ar = res.per_agent.at("seer");
  REQUIRE(ar.snapshots.size() == 3);

  // cycle 0: bought 10 YES at the 50c ask, marked at the 40c bid
  CHECK(ar.snapshots[0].cash == dollars(10'000) - dollars(5));
  CHECK(ar.snapshots[0].account_value == dollars(10'000) - dollars(1));
  CHECK(ar.snapshots[0].unrealized_pnl == -dollars(1));
  CHECK(ar.snapshots[0].realized_pnl_total == 0);
  CHECK(ar.snapshots[0].trades_this_cycle == 1);

  // cycle 1: market settles YES, $1.00 per share pays out into cash
  CHECK(ar.snapshots[1].cash == dollars(10'005));
  CHECK(ar.snapshots[1].account_value == dollars(10'005));
  CHECK(ar.snapshots[1].realized_pnl_total == dollars(5));
  CHECK(ar.snapshots[1].unrealized_pnl == 0);
  CHECK(ar.snapshots[1].trades_this_cycle == 0);

  // cycle 2: nothing left to do
  CHECK(ar.snapshots[2].account_value == dollars(10'005));
  REQUIRE(ar.closed_trades.size() == 1);
  CHECK(ar.closed_trades[0].exit_type == ExitType::Settlement);
  CHECK(ar.closed_trades[0].realized_pnl == dollars(5));
  CHECK(ar.metrics.win_settlement.matched == 1);
  CHECK(ar.metrics.win_settlement.wins == 1);
  // one settled position sits under the five-trade reporting threshold
  CHECK_FALSE(ar.metrics.win_settlement.rate_cpp.has_value());
}

TEST_CASE("same-seed random agents trade identically in paper mode",
          "[orchestrator]") {
  RunConfig cfg = base_config();
  cfg.agents = {
      {"rndA", "random", json{{"seed", 42}, {"trade_prob_ppm", 400'000}}},
      {"rndB", "random", json{{"seed", 42}, {"trade_prob_ppm", 400'000}}}};
  RunResult res = run_arena(cfg);
  const AgentResult& a = res.per_agent.at("rndA");
  const AgentResult& b = res.per_agent.at("rndB");
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].account_value == b.snapshots[i].account_value);
    CHECK(a.snapshots[i].cash == b.snapshots[i].cash);
    CHECK(a.snapshots[i].trades_this_cycle == b.snapshots[i].trades_this_cycle);
  }
  CHECK(json(a.closed_trades) == json(b.closed_trades));
  json ma = json(a.metrics), mb = json(b.metrics);
  ma.erase("agent_id");
  mb.erase("agent_id");
  CHECK(ma == mb);
}

TEST_CASE("removing an agent leaves the other's events unchanged",
          "[orchestrator]") {
  RunConfig both = base_config();
  both.agents = {
      {"keep", "random", json{{"seed", 1}, {"trade_prob_ppm", 400'000}}},
      {"drop", "random", json{{"seed", 2}, {"trade_prob_ppm", 400'000}}}};
  RunConfig solo = both;
  solo.agents = {both.agents[0]};

  std::ostringstream log_both, log_solo;
  run_arena(both, &log_both);
  run_arena(solo, &log_solo);

  auto keep_events = [](const std::string& blob) {
    std::istringstream in(blob);
    LogContents lc = parse_log(in);
    std::vector<json> out;
    for (const EventRecord& e : lc.events) {
      if (e.agent_id && *e.agent_id == "keep") {
        json payload = e.payload;
        // absolute seq references shift when other agents' events vanish;
        // the isolation contract covers the agent-visible content
        payload.erase("verdict_seq");
        json j{{"cycle", e.cycle_index}, {"kind", to_string(e.kind)},
               {"payload", std::move(payload)}};
        out.push_back(std::move(j));
      }
    }
    return out;
  };
  CHECK(keep_events(log_both.str()) == keep_events(log_solo.str()));
}

TEST_CASE("event order inside a cycle follows the six steps", "[orchestrator]") {
  RunConfig cfg = base_config();
  cfg.n_cycles = 12;
  cfg.universe_params.horizon_cycles = 8; // guarantee settlements mid-run
  cfg.agents = {
      {"r1", "random", json{{"seed", 5}, {"trade_prob_ppm", 500'000}}},
      {"h1", "hold", json{{"seed", 6}, {"trade_prob_ppm", 500'000}}}};
  std::ostringstream log_stream;
  run_arena(cfg, &log_stream);
  std::istringstream in(log_stream.str());
  LogContents lc = parse_log(in);
  REQUIRE_FALSE(lc.events.empty());

  auto rank = [](const EventRecord& e) {
    switch (e.kind) {
      case EventKind::QuoteUpdate: return 0;
      case EventKind::Settlement: return 1;
      case EventKind::LedgerDelta:
        return e.payload.at("op") == "settlement" ? 1 : 3;
      case EventKind::Context: return 2;
      case EventKind::Verdict:
      case EventKind::Execution:
      case EventKind::Note:
      case EventKind::AgentError: return 3;
      case EventKind::Snapshot: return 4;
    }
    return 5;
  };
  std::int64_t cycle = -1;
  int prev_rank = -1;
  std::int64_t prev_seq = -1;
  bool saw_settlement = false, saw_execution = false;
  for (const EventRecord& e : lc.events) {
    REQUIRE(e.seq > prev_seq);
    prev_seq = e.seq;
    if (e.cycle_index != cycle) {
      REQUIRE(e.cycle_index == cycle + 1);
      cycle = e.cycle_index;
      prev_rank = -1;
    }
    REQUIRE(rank(e) >= prev_rank);
    prev_rank = rank(e);
    saw_settlement |= e.kind == EventKind::Settlement;
    saw_execution |= e.kind == EventKind::Execution;
  }
  CHECK(saw_settlement);
  CHECK(saw_execution);
}

TEST_CASE("every execution references a prior accepting verdict",
          "[orchestrator]") {
  RunConfig cfg = base_config();
  cfg.agents = {{"r1", "random", json{{"seed", 9}, {"trade_prob_ppm", 600'000}}}};
  std::ostringstream log_stream;
  run_arena(cfg, &log_stream);
  std::istringstream in(log_stream.str());
  LogContents lc = parse_log(in);

  std::map<std::int64_t, const EventRecord*> by_seq;
  for (const EventRecord& e : lc.events) by_seq[e.seq] = &e;
  int executions = 0;
  for (const EventRecord& e : lc.events) {
    if (e.kind != EventKind::Execution) continue;
    ++executions;
    std::int64_t vseq = e.payload.at("verdict_seq").get<std::int64_t>();
    REQUIRE(vseq < e.seq);
    const EventRecord* v = by_seq.at(vseq);
    REQUIRE(v->kind == EventKind::Verdict);
    REQUIRE(v->payload.at("verdict").at("accepted").get<bool>());
    REQUIRE(v->payload.at("order").at("order_id") ==
            e.payload.at("report").at("order_id"));
  }
  CHECK(executions > 0);
}

TEST_CASE("a zero-market universe leaves every agent flat", "[orchestrator]") {
  Universe empty;
  empty.params.n_markets = 0;
  RunConfig cfg;
  cfg.n_cycles = 5;
  cfg.cycle_interval_secs = 1'800;
  cfg.universe_fixture = write_fixture(empty, "empty");
  cfg.agents = {{"r1", "random", json{{"trade_prob_ppm", 900'000}}},
                {"o1", "oracle", json::object()}};
  RunResult res = run_arena(cfg);
  for (const auto& [id, ar] : res.per_agent) {
    REQUIRE(ar.snapshots.size() == 5);
    for (const CycleSnapshot& s : ar.snapshots)
      CHECK(s.account_value == cfg.starting_capital);
    CHECK(ar.closed_trades.empty());
  }
}

TEST_CASE("invalid configs fail before any cycle runs", "[orchestrator]") {
  RunConfig cfg = base_config();
  SECTION("no agents") { CHECK_THROWS_AS(run_arena(cfg), ValidationError); }
  SECTION("zero cycles") {
    cfg.agents = {{"a", "noop", json::object()}};
    cfg.n_cycles = 0;
    CHECK_THROWS_AS(run_arena(cfg), ValidationError);
  }
  SECTION("duplicate agent ids") {
    cfg.agents = {{"a", "noop", json::object()}, {"a", "noop", json::object()}};
    CHECK_THROWS_AS(run_arena(cfg), ValidationError);
  }
  SECTION("unknown agent kind") {
    cfg.agents = {{"a", "frontier-llm", json::object()}};
    CHECK_THROWS_AS(run_arena(cfg), ValidationError);
  }
}

TEST_CASE("a throwing agent is logged and treated as noop", "[orchestrator]") {
  struct Bomb : Agent {
    std::string id_;
    explicit Bomb(std::string id) : id_(std::move(id)) {}
    const std::string& id() const override { return id_; }
    std::vector<AgentAction> decide(const CycleContext&) override {
      throw std::runtime_error("synthetic agent failure");
    }
  };
  RunConfig cfg = base_config();
  cfg.n_cycles = 3;
  cfg.agents = {{"bomb", "custom", json::object()},
                {"idle", "noop", json::object()}};
  AgentFactory factory = [](const AgentSpec& spec,
                            const AgentBuildInputs&) -> std::unique_ptr<Agent> {
    if (spec.kind == "custom") return std::make_unique<Bomb>(spec.agent_id);
    return nullptr; // fall through to the default factory
  };
  std::ostringstream log_stream;
  Orchestrator orch(cfg, &log_stream, factory);
  RunResult res = orch.run();

  // the failing agent is skipped each cycle but still snapshotted, flat
  const AgentResult& ar = res.per_agent.at("bomb");
  REQUIRE(ar.snapshots.size() == 3);
  for (const CycleSnapshot& s : ar.snapshots)
    CHECK(s.account_value == cfg.starting_capital);

  std::istringstream in(log_stream.str());
  LogContents lc = parse_log(in);
  int errors = 0;
  for (const EventRecord& e : lc.events)
    if (e.kind == EventKind::AgentError) {
      ++errors;
      CHECK(*e.agent_id == "bomb");
      CHECK(e.payload.at("error").get<std::string>().find("synthetic") !=
            std::string::npos);
    }
  CHECK(errors == 3);
}

TEST_CASE("tool actions flow through the cycle into the log", "[orchestrator]") {
  struct ToolUser : Agent {
    std::string id_;
    explicit ToolUser(std::string id) : id_(std::move(id)) {}
    const std::string& id() const override { return id_; }
    std::vector<AgentAction> decide(const CycleContext& ctx) override {
      if (ctx.cycle_index != 0) return {};
      std::vector<AgentAction> out;
      out.push_back({ResearchAction{"temperature outlook"}, "digging in"});
      out.push_back({NotePutAction{"thesis", "weather books look rich",
                                   NoteKind::Belief}, ""});
      out.push_back({NoteEditAction{"thesis", "weather books look cheap"}, ""});
      out.push_back({NoteSearchAction{"weather"}, ""});
      out.push_back({NoteEditAction{"no-such-key", "x"}, ""}); // agent mistake
      DiscoverAction d;
      d.query.kind = QueryKind::VolumeTop;
      d.query.limit = 3;
      out.push_back({d, ""});
      if (!ctx.markets.empty())
        out.push_back(place_order(ctx.markets[0].market_id, Side::YES,
                                  1'000, kMicroPerDollar, "small probe"));
      return out;
    }
  };
  RunConfig cfg = base_config();
  cfg.n_cycles = 2;
  cfg.agents = {{"tools", "custom", json::object()}};
  AgentFactory factory = [](const AgentSpec& spec, const AgentBuildInputs&)
      -> std::unique_ptr<Agent> {
    return std::make_unique<ToolUser>(spec.agent_id);
  };
  std::ostringstream log_stream;
  Orchestrator orch(cfg, &log_stream, factory);
  orch.run();

  std::istringstream in(log_stream.str());
  LogContents lc = parse_log(in);
  std::map<std::string, int> ops;
  bool edit_error = false, search_hit = false, discover_ok = false,
       reasoning_logged = false;
  for (const EventRecord& e : lc.events) {
    if (e.kind == EventKind::Note) {
      std::string op = e.payload.at("op").get<std::string>();
      ops[op]++;
      if (op == "research")
        CHECK_FALSE(e.payload.at("snippet").get<std::string>().empty());
      if (op == "note_edit" && !e.payload.value("ok", true)) edit_error = true;
      if (op == "note_search" && !e.payload.at("hits").empty()) search_hit = true;
      if (op == "discover" && e.payload.value("ok", false))
        discover_ok = e.payload.at("result").size() == 3;
    }
    if (e.kind == EventKind::Verdict && e.payload.contains("reasoning"))
      reasoning_logged |= e.payload.at("reasoning") == "small probe";
  }
  CHECK(ops["research"] == 1);
  CHECK(ops["note_put"] == 1);
  CHECK(ops["note_edit"] == 2);
  CHECK(ops["note_search"] == 1);
  CHECK(ops["discover"] == 1);
  CHECK(edit_error);    // the bad edit is logged, not fatal
  CHECK(search_hit);    // the earlier put is findable in the same cycle
  CHECK(discover_ok);
  CHECK(reasoning_logged);
}

TEST_CASE("a perfect oracle wins every settlement", "[orchestrator]") {
  RunConfig cfg;
  cfg.seed = 21;
  cfg.n_cycles = 12;
  cfg.cycle_interval_secs = 1'800;
  cfg.universe_params.n_markets = 40;
  cfg.universe_params.horizon_cycles = 12;
  cfg.agents = {{"seer", "oracle",
                 json{{"accuracy_ppm", 1'000'000}, {"qty_shares", 1}}}};
  RunResult res = run_arena(cfg);
  const AgentResult& ar = res.per_agent.at("seer");
  std::int64_t settled = 0;
  for (const ClosedTrade& t : ar.closed_trades) {
    if (t.exit_type != ExitType::Settlement) continue;
    ++settled;
    CHECK(t.realized_pnl > 0);
  }
  REQUIRE(settled >= 20);
  REQUIRE(ar.metrics.win_settlement.rate_cpp.has_value());
  CHECK(*ar.metrics.win_settlement.rate_cpp == 10'000); // 100.00%
  CHECK(ar.metrics.total_pnl > 0);
}

TEST_CASE("live-fidelity runs with fees never violate the books",
          "[orchestrator]") {
  // thin displayed depth + quadratic fees + busy traders: every fill path,
  // including partial netting fills, must keep cash nonnegative (the
  // orchestrator aborts the run on any ledger invariant violation)
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.n_cycles = 16;
    cfg.cycle_interval_secs = 1'800;
    cfg.universe_params.n_markets = 8;
    cfg.universe_params.horizon_cycles = 12;
    cfg.universe_params.base_depth = 2;
    cfg.universe_params.volume_step_max = 500;
    cfg.venue.execution_mode = ExecMode::LiveFidelity;
    cfg.venue.fee_schedule = FeeSchedule{FeeKind::QuadraticTaker, 7, 100};
    cfg.agents = {
        {"r1", "random", json{{"seed", seed}, {"trade_prob_ppm", 700'000}}},
        {"x1", "early_exit",
         json{{"seed", seed + 99}, {"trade_prob_ppm", 600'000},
              {"hold_cycles", 1}}}};
    RunResult res;
    REQUIRE_NOTHROW(res = run_arena(cfg));
    for (const auto& [id, ar] : res.per_agent)
      for (const CycleSnapshot& s : ar.snapshots) REQUIRE(s.cash >= 0);
  }
}

TEST_CASE("desk-scale run emits one snapshot per agent per cycle",
          "[orchestrator]") {
  RunConfig cfg;
  cfg.seed = 11;
  cfg.n_cycles = 20;
  cfg.cycle_interval_secs = 1'800;
  cfg.universe_params.n_markets = 10;
  cfg.universe_params.horizon_cycles = 20;
  cfg.agents = {{"a1", "random", json{{"seed", 1}}},
                {"a2", "hold", json{{"seed", 2}}},
                {"a3", "early_exit", json{{"seed", 3}}},
                {"a4", "ev", json{{"seed", 4}, {"sigma_ppm", 100'000}}}};
  RunResult res = run_arena(cfg);
  std::size_t total = 0;
  for (const auto& [id, ar] : res.per_agent) {
    CHECK(ar.snapshots.size() == 20);
    total += ar.snapshots.size();
  }
  CHECK(total == 80);
}
