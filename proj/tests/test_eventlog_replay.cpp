#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "pmsim/replay.hpp"
#include "pmsim/report.hpp"

using namespace pmsim;

namespace {

RunConfig demo_config() {
  RunConfig cfg;
  cfg.seed = 17;
  cfg.n_cycles = 15;
  cfg.cycle_interval_secs = 1'800;
  cfg.universe_params.n_markets = 8;
  cfg.universe_params.horizon_cycles = 12; // settlements inside the run
  cfg.agents = {
      {"rnd", "random", json{{"seed", 4}, {"trade_prob_ppm", 500'000}}},
      {"hold", "hold", json{{"seed", 5}, {"trade_prob_ppm", 400'000}}},
      {"exit", "early_exit", json{{"seed", 6}, {"trade_prob_ppm", 400'000}}}};
  return cfg;
}

std::string run_to_log(const RunConfig& cfg, RunResult* out = nullptr) {
  std::ostringstream log_stream;
  RunResult res = run_arena(cfg, &log_stream);
  if (out) *out = res;
  return log_stream.str();
}

} // namespace

TEST_CASE("event log round trip preserves order and content", "[eventlog]") {
  std::ostringstream out;
  EventLogWriter w(out, json{{"starting_capital", 1}});
  for (int i = 0; i < 25; ++i)
    w.append(EventKind::Note, i / 5, "agent",
             json{{"op", "research"}, {"i", i}});
  std::istringstream in(out.str());
  LogContents lc = parse_log(in);
  CHECK(lc.version == kLogVersion);
  REQUIRE(lc.events.size() == 25);
  for (int i = 0; i < 25; ++i) {
    CHECK(lc.events[i].seq == i);
    CHECK(lc.events[i].payload.at("i") == i);
  }
  CHECK_FALSE(lc.truncated_tail);
}

TEST_CASE("truncated final line is tolerated with a flag", "[eventlog]") {
  std::ostringstream out;
  EventLogWriter w(out);
  for (int i = 0; i < 5; ++i) w.append(EventKind::Note, 0, std::nullopt, json{{"i", i}});
  std::string blob = out.str();
  blob.resize(blob.size() - 7); // chop into the last record
  std::istringstream in(blob);
  LogContents lc = parse_log(in);
  CHECK(lc.events.size() == 4);
  CHECK(lc.truncated_tail);
}

TEST_CASE("corrupt interior line is a hard error with its line number",
          "[eventlog]") {
  std::ostringstream out;
  EventLogWriter w(out);
  for (int i = 0; i < 5; ++i) w.append(EventKind::Note, 0, std::nullopt, json{{"i", i}});
  std::string blob = out.str();
  // mangle the third record (line 4: header + records 1..2 precede it)
  std::size_t pos = 0;
  for (int n = 0; n < 3; ++n) pos = blob.find('\n', pos) + 1;
  blob[pos + 2] = '\x01';
  std::istringstream in(blob);
  try {
    parse_log(in);
    FAIL("expected LogError");
  } catch (const LogError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("identical configs produce byte-identical logs", "[eventlog]") {
  RunConfig cfg = demo_config();
  std::string a = run_to_log(cfg);
  std::string b = run_to_log(cfg);
  REQUIRE(a == b);
  CHECK(a.find("\"kind\":\"Snapshot\"") != std::string::npos);

  RunConfig other = cfg;
  other.seed = 18;
  CHECK(run_to_log(other) != a);
}

TEST_CASE("replay reconstructs the live result exactly", "[eventlog]") {
  RunConfig cfg = demo_config();
  RunResult live;
  std::string blob = run_to_log(cfg, &live);
  std::istringstream in(blob);
  RunResult replayed = replay(parse_log(in));

  REQUIRE(replayed.agent_order == live.agent_order);
  for (const std::string& id : live.agent_order) {
    const AgentResult& l = live.per_agent.at(id);
    const AgentResult& r = replayed.per_agent.at(id);
    REQUIRE(json(l.snapshots) == json(r.snapshots));
    REQUIRE(json(l.closed_trades) == json(r.closed_trades));
    REQUIRE(json(l.metrics) == json(r.metrics));
  }
}

TEST_CASE("snapshots deleted from the log are recomputed equal", "[eventlog]") {
  RunConfig cfg = demo_config();
  RunResult live;
  std::string blob = run_to_log(cfg, &live);
  std::istringstream in(blob);
  LogContents lc = parse_log(in);
  LogContents stripped;
  stripped.version = lc.version;
  stripped.header = lc.header;
  for (const EventRecord& e : lc.events)
    if (e.kind != EventKind::Snapshot) stripped.events.push_back(e);
  REQUIRE(stripped.events.size() < lc.events.size());

  RunResult replayed = replay(stripped);
  for (const std::string& id : live.agent_order) {
    REQUIRE(json(replayed.per_agent.at(id).snapshots) ==
            json(live.per_agent.at(id).snapshots));
    REQUIRE(json(replayed.per_agent.at(id).metrics) ==
            json(live.per_agent.at(id).metrics));
  }
}

TEST_CASE("empty log replays to an empty result", "[eventlog]") {
  std::istringstream in("");
  LogContents lc = parse_log(in);
  RunResult res = replay(lc);
  CHECK(res.per_agent.empty());
  CHECK(res.agent_order.empty());
}

TEST_CASE("version mismatch is an explicit error", "[eventlog]") {
  std::ostringstream out;
  EventLogWriter w(out, json{{"starting_capital", 1}});
  std::string blob = out.str();
  std::size_t pos = blob.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  blob.replace(pos, 11, "\"version\":9");
  std::istringstream in(blob);
  CHECK_THROWS_AS(replay(parse_log(in)), LogError);
}

TEST_CASE("cash attribution audit walks the whole log", "[eventlog]") {
  RunConfig cfg = demo_config();
  cfg.venue.fee_schedule = FeeSchedule{FeeKind::QuadraticTaker, 7, 100};
  std::string blob = run_to_log(cfg);
  std::istringstream in(blob);
  LogContents lc = parse_log(in);
  CHECK_NOTHROW(audit_cash_attribution(lc));

  SECTION("a tampered cash total is caught") {
    bool tampered = false;
    for (EventRecord& e : lc.events) {
      if (e.kind == EventKind::LedgerDelta && !tampered) {
        e.payload["cash_after"] = e.payload["cash_after"].get<Micro>() + 1;
        tampered = true;
      }
    }
    REQUIRE(tampered);
    CHECK_THROWS_AS(audit_cash_attribution(lc), LogError);
  }
}

TEST_CASE("leaderboard csv mirrors the reference table columns", "[eventlog]") {
  RunConfig cfg = demo_config();
  RunResult res = run_arena(cfg);
  ReportBundle bundle = build_reports(res);
  std::string csv = render_leaderboard_csv(bundle);

  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "Model,Final Value,Total PnL,Total Return,Win Rate (Early Exit),Max DD");

  // one row per agent, ranked by final account value descending
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty()) rows.push_back(line);
  REQUIRE(rows.size() == cfg.agents.size());
  REQUIRE(bundle.leaderboard.size() == cfg.agents.size());
  for (std::size_t i = 1; i < bundle.leaderboard.size(); ++i)
    CHECK(bundle.leaderboard[i - 1].final_value >=
          bundle.leaderboard[i].final_value);

  // category and exit tables render with their headers
  CHECK(render_category_csv(bundle).rfind("Model,Category,Settled,", 0) == 0);
  CHECK(render_exit_csv(bundle).rfind("Model,Settlements,Early Exits,", 0) == 0);
  CHECK_FALSE(render_text(bundle).empty());
}

TEST_CASE("run result json is stable for downstream tooling", "[eventlog]") {
  RunConfig cfg = demo_config();
  cfg.n_cycles = 4;
  RunResult a = run_arena(cfg);
  RunResult b = run_arena(cfg);
  CHECK(json(a) == json(b));
}
