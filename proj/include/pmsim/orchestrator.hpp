#pragma once

#include <deque>
#include <functional>
#include <memory>

#include "pmsim/agents.hpp"
#include "pmsim/eventlog.hpp"
#include "pmsim/risk.hpp"
#include "pmsim/universe.hpp"
#include "pmsim/venue.hpp"

namespace pmsim {

// Drives the per-cycle flow, in order:
//   1 market data sync   2 settlement processing   3 context gathering
//   4 agent decisions    5 trade execution         6 performance snapshots
// Agents are processed in agent_id order at every step, cycles are globally
// sequential, and every state change is logged, so a run is a pure function
// of its config.

struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AgentSpec {
  std::string agent_id;
  std::string kind;
  json params = json::object();
};

inline void to_json(json& j, const AgentSpec& a) {
  j = json{{"agent_id", a.agent_id}, {"kind", a.kind}, {"params", a.params}};
}

inline void from_json(const json& j, AgentSpec& a) {
  j.at("agent_id").get_to(a.agent_id);
  j.at("kind").get_to(a.kind);
  a.params = j.value("params", json::object());
}

struct RunConfig {
  std::uint64_t seed = 1;
  int n_cycles = 1;
  // Fixed virtual cadence; when absent one is seeded from the 15..45 minute
  // band and held for the whole run.
  std::optional<std::int64_t> cycle_interval_secs;
  Micro starting_capital = 10'000 * kMicroPerDollar;
  std::vector<AgentSpec> agents;
  VenueConfig venue;
  std::int64_t concentration_num = 15;
  std::int64_t concentration_den = 100;
  UniverseParams universe_params;
  std::optional<std::string> universe_fixture; // overrides universe_params
  std::int64_t settlement_window = 16;
  std::int64_t netting_window = 16;
  std::int64_t expiry_reminder_cycles = 3;
  NoteLimits note_limits;
};

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"seed", c.seed},
           {"n_cycles", c.n_cycles},
           {"starting_capital", c.starting_capital},
           {"agents", c.agents},
           {"venue", c.venue},
           {"concentration_num", c.concentration_num},
           {"concentration_den", c.concentration_den},
           {"universe_params", c.universe_params},
           {"settlement_window", c.settlement_window},
           {"netting_window", c.netting_window},
           {"expiry_reminder_cycles", c.expiry_reminder_cycles},
           {"note_max_body_bytes", c.note_limits.max_body_bytes},
           {"note_max_notes_per_agent", c.note_limits.max_notes_per_agent}};
  if (c.cycle_interval_secs) j["cycle_interval_secs"] = *c.cycle_interval_secs;
  if (c.universe_fixture) j["universe_fixture"] = *c.universe_fixture;
}

inline void from_json(const json& j, RunConfig& c) {
  RunConfig d;
  c.seed = j.value("seed", d.seed);
  c.n_cycles = j.value("n_cycles", d.n_cycles);
  if (j.contains("cycle_interval_secs"))
    c.cycle_interval_secs = j.at("cycle_interval_secs").get<std::int64_t>();
  c.starting_capital = j.value("starting_capital", d.starting_capital);
  if (j.contains("agents")) j.at("agents").get_to(c.agents);
  if (j.contains("venue")) j.at("venue").get_to(c.venue);
  c.concentration_num = j.value("concentration_num", d.concentration_num);
  c.concentration_den = j.value("concentration_den", d.concentration_den);
  if (j.contains("universe_params"))
    j.at("universe_params").get_to(c.universe_params);
  if (j.contains("universe_fixture"))
    c.universe_fixture = j.at("universe_fixture").get<std::string>();
  c.settlement_window = j.value("settlement_window", d.settlement_window);
  c.netting_window = j.value("netting_window", d.netting_window);
  c.expiry_reminder_cycles =
      j.value("expiry_reminder_cycles", d.expiry_reminder_cycles);
  c.note_limits.max_body_bytes =
      j.value("note_max_body_bytes", d.note_limits.max_body_bytes);
  c.note_limits.max_notes_per_agent =
      j.value("note_max_notes_per_agent", d.note_limits.max_notes_per_agent);
}

inline void validate(const RunConfig& c) {
  if (c.n_cycles < 1) throw ValidationError("config: n_cycles must be >= 1");
  if (c.agents.empty()) throw ValidationError("config: at least one agent");
  if (c.starting_capital <= 0)
    throw ValidationError("config: starting_capital must be positive");
  if (c.concentration_num <= 0 || c.concentration_den <= 0 ||
      c.concentration_num > c.concentration_den)
    throw ValidationError("config: concentration fraction must be in (0, 1]");
  if (c.cycle_interval_secs && *c.cycle_interval_secs <= 0)
    throw ValidationError("config: cycle interval must be positive");
  std::set<std::string> ids;
  for (const AgentSpec& a : c.agents) {
    if (a.agent_id.empty()) throw ValidationError("config: empty agent_id");
    if (!ids.insert(a.agent_id).second)
      throw ValidationError("config: duplicate agent_id " + a.agent_id);
  }
}

struct AgentResult {
  std::vector<CycleSnapshot> snapshots;
  std::vector<ClosedTrade> closed_trades;
  MetricsReport metrics;
};

inline void to_json(json& j, const AgentResult& r) {
  j = json{{"snapshots", r.snapshots},
           {"closed_trades", r.closed_trades},
           {"metrics", r.metrics}};
}

struct RunResult {
  Micro starting_capital = 0;
  std::int64_t t0 = 0;
  std::int64_t interval_secs = 0;
  std::vector<std::string> agent_order;
  std::map<std::string, AgentResult> per_agent;
  std::map<std::string, Category> categories;
};

inline void to_json(json& j, const RunResult& r) {
  j = json{{"starting_capital", r.starting_capital},
           {"t0", r.t0},
           {"interval_secs", r.interval_secs},
           {"agent_order", r.agent_order},
           {"per_agent", r.per_agent}};
}

// Extension seam: embedders can supply their own agent implementations; the
// default factory builds the scripted reference kinds.
struct AgentBuildInputs {
  std::uint64_t run_seed = 0;
  const PrivilegedFeed* feed = nullptr;
  FeeSchedule fee_schedule;
};
using AgentFactory =
    std::function<std::unique_ptr<Agent>(const AgentSpec&, const AgentBuildInputs&)>;

class Orchestrator {
public:
  Orchestrator(RunConfig cfg, std::ostream* log_stream,
               AgentFactory factory = {})
      : cfg_(std::move(cfg)) {
    validate(cfg_);
    interval_ = cfg_.cycle_interval_secs
                    ? *cfg_.cycle_interval_secs
                    : 900 + static_cast<std::int64_t>(
                                mix_seed(cfg_.seed, "interval") % 1801);

    if (cfg_.universe_fixture) {
      universe_ = load_universe(*cfg_.universe_fixture);
    } else {
      UniverseParams up = cfg_.universe_params;
      up.interval_secs = interval_; // expiries land on cycle boundaries
      up.share_rule = cfg_.venue.share_rule;
      universe_ = make_universe(mix_seed(cfg_.seed, "universe"), up);
    }
    t0_ = universe_.params.t0;
    venue_ = SimVenue(cfg_.venue);
    research_ = std::make_unique<ResearchProvider>(mix_seed(cfg_.seed, "research"));
    notes_ = KnowledgeStore(cfg_.note_limits);

    PrivilegedFeed feed;
    for (const SyntheticMarket& m : universe_.markets) {
      feed.outcomes[m.spec.market_id] = m.scheduled.outcome;
      feed.true_probs[m.spec.market_id] = m.spec.true_prob;
      scheduled_.push_back(m.scheduled);
      categories_[m.spec.market_id] = m.spec.category;
    }
    risk_ = RiskConfig{cfg_.concentration_num, cfg_.concentration_den,
                       cfg_.venue.fee_schedule};

    AgentBuildInputs inputs{cfg_.seed, &feed, cfg_.venue.fee_schedule};
    for (const AgentSpec& spec : cfg_.agents) {
      AgentRuntime rt;
      if (factory) rt.agent = factory(spec, inputs);
      if (!rt.agent)
        rt.agent = make_agent(spec.kind, spec.agent_id, spec.params, cfg_.seed,
                              feed, cfg_.venue.fee_schedule);
      rt.account = Account(spec.agent_id, cfg_.starting_capital);
      agents_.emplace(spec.agent_id, std::move(rt));
    }

    if (log_stream) {
      json header{{"starting_capital", cfg_.starting_capital},
                  {"t0", t0_},
                  {"interval_secs", interval_},
                  {"n_cycles", cfg_.n_cycles},
                  {"agent_ids", agent_ids()}};
      log_.emplace(*log_stream, header);
    }
    for (const auto& [id, q] : universe_.quotes) history_[id].push_back(q);
  }

  std::vector<std::string> agent_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, rt] : agents_) ids.push_back(id);
    return ids;
  }

  RunResult run() {
    for (int k = 0; k < cfg_.n_cycles; ++k) run_cycle(k);
    RunResult res;
    res.starting_capital = cfg_.starting_capital;
    res.t0 = t0_;
    res.interval_secs = interval_;
    res.agent_order = agent_ids();
    res.categories = categories_;
    for (auto& [id, rt] : agents_) {
      AgentResult ar;
      ar.snapshots = rt.snapshots;
      ar.closed_trades = rt.closed_trades;
      std::vector<Micro> values;
      values.reserve(rt.snapshots.size());
      for (const CycleSnapshot& s : rt.snapshots) values.push_back(s.account_value);
      ar.metrics = build_metrics(id, values, cfg_.starting_capital,
                                 ar.closed_trades, categories_);
      res.per_agent.emplace(id, std::move(ar));
    }
    return res;
  }

  void run_cycle(int cycle) {
    std::int64_t now = t0_ + static_cast<std::int64_t>(cycle + 1) * interval_;

    // 1. market data synchronization
    for (const QuoteTop& q : step_quotes(universe_, cycle, now)) {
      venue_.refresh_depth(q);
      history_[q.market_id].push_back(q);
      log(EventKind::QuoteUpdate, cycle, std::nullopt, json(q));
    }

    // 2. settlement processing
    for (const SettlementOutcome& due : venue_.settle_due(now, scheduled_)) {
      log(EventKind::Settlement, cycle, std::nullopt, json(due));
      for (auto& [id, rt] : agents_) {
        auto applied = apply_settlement(rt.account, due);
        if (!applied) continue;
        rt.closed_trades.push_back(applied->closed);
        push_window(rt.recent_settlements, applied->record,
                    cfg_.settlement_window);
        json payload{{"op", "settlement"},
                     {"market_id", due.market_id},
                     {"category", to_string(categories_.at(due.market_id))},
                     {"outcome", to_string(due.outcome)},
                     {"payout", applied->payout},
                     {"cash_after", rt.account.cash},
                     {"realized_total_after", rt.account.realized_pnl_total},
                     {"closed_trade", applied->closed},
                     {"settlement_record", applied->record},
                     {"pos_yes", position_state(rt.account, due.market_id, Side::YES)},
                     {"pos_no", position_state(rt.account, due.market_id, Side::NO)}};
        log(EventKind::LedgerDelta, cycle, id, std::move(payload));
        check_books(rt.account);
      }
    }

    // 3. context gathering (cycle-start valuation reused by the risk gate)
    std::map<std::string, CycleContext> contexts;
    for (auto& [id, rt] : agents_) {
      CycleContext ctx = build_context(rt, cycle, now);
      log(EventKind::Context, cycle, id,
          json{{"account_value", ctx.portfolio.account_value},
               {"cash", ctx.portfolio.cash},
               {"realized_total", rt.account.realized_pnl_total},
               {"open_positions", ctx.portfolio.positions.size()},
               {"markets", ctx.markets.size()}});
      contexts.emplace(id, std::move(ctx));
    }

    // 4. agent decision-making
    std::map<std::string, std::vector<AgentAction>> decisions;
    for (auto& [id, rt] : agents_) {
      try {
        decisions[id] = rt.agent->decide(contexts.at(id));
      } catch (const std::exception& e) {
        log(EventKind::AgentError, cycle, id, json{{"error", e.what()}});
        decisions[id] = {};
      }
    }

    // 5. trade execution
    for (auto& [id, rt] : agents_) {
      int order_idx = 0;
      for (const AgentAction& action : decisions[id])
        execute_action(rt, contexts.at(id), action, cycle, now, order_idx);
    }

    // 6. performance snapshots
    for (auto& [id, rt] : agents_) {
      CycleSnapshot s;
      s.agent_id = id;
      s.cycle_index = cycle;
      s.as_of = now;
      s.cash = rt.account.cash;
      s.account_value = account_value(rt.account, universe_.quotes);
      s.realized_pnl_total = rt.account.realized_pnl_total;
      s.unrealized_pnl = s.account_value - cfg_.starting_capital - s.realized_pnl_total;
      s.trades_this_cycle = rt.trades_this_cycle;
      s.stale_marks = stale_marks(rt.account, now);
      rt.trades_this_cycle = 0;
      rt.snapshots.push_back(s);
      log(EventKind::Snapshot, cycle, id, json(s));
    }
  }

  const Universe& universe() const { return universe_; }
  const QuoteHistory& history() const { return history_; }
  std::int64_t interval_secs() const { return interval_; }

private:
  struct AgentRuntime {
    std::unique_ptr<Agent> agent;
    Account account{};
    std::vector<CycleSnapshot> snapshots;
    std::vector<ClosedTrade> closed_trades;
    std::deque<SettlementRecord> recent_settlements;
    std::deque<ClosedTrade> recent_nettings;
    std::int64_t trades_this_cycle = 0;
  };

  template <typename T>
  static void push_window(std::deque<T>& window, const T& item, std::int64_t cap) {
    window.push_back(item);
    while (static_cast<std::int64_t>(window.size()) > cap) window.pop_front();
  }

  void log(EventKind kind, int cycle, std::optional<std::string> agent, json payload) {
    if (log_) log_->append(kind, cycle, std::move(agent), std::move(payload));
  }

  std::int64_t log_seq(EventKind kind, int cycle, const std::string& agent,
                       json payload) {
    if (!log_) return -1;
    return log_->append(kind, cycle, agent, std::move(payload));
  }

  json position_state(const Account& a, const std::string& market_id, Side s) {
    auto it = a.positions.find(market_id);
    if (it == a.positions.end())
      return json(Position{s, 0, 0, 0});
    return json(it->second.get(s));
  }

  std::int64_t stale_marks(const Account& a, std::int64_t now) const {
    std::int64_t n = 0;
    for (const auto& [market_id, pp] : a.positions) {
      if (pp.flat()) continue;
      auto q = universe_.quotes.find(market_id);
      if (q == universe_.quotes.end() || q->second.as_of < now) ++n;
    }
    return n;
  }

  void check_books(const Account& a) const {
    if (a.cash < 0)
      throw HarnessError("invariant violated: negative cash for " + a.agent_id);
    if (conservation_residual_nano(a) != 0)
      throw HarnessError("invariant violated: conservation residual for " +
                         a.agent_id);
    for (const auto& [market_id, pp] : a.positions)
      if (pp.yes.qty > 0 && pp.no.qty > 0)
        throw HarnessError("invariant violated: two-sided position in " +
                           market_id + " for " + a.agent_id);
  }

  CycleContext build_context(AgentRuntime& rt, int cycle, std::int64_t now) {
    CycleContext ctx;
    ctx.cycle_index = cycle;
    ctx.now = now;
    ctx.cycle_interval_secs = interval_;
    for (const SyntheticMarket& m : universe_.markets) {
      if (now >= m.spec.expiry) continue;
      ctx.markets.push_back(
          make_market_view(m.spec, universe_.quotes.at(m.spec.market_id)));
    }
    ctx.portfolio.cash = rt.account.cash;
    ctx.portfolio.starting_capital = cfg_.starting_capital;
    ctx.portfolio.account_value = account_value(rt.account, universe_.quotes);
    ctx.portfolio.return_pct_cpp = return_cpp(
        ctx.portfolio.account_value - cfg_.starting_capital, cfg_.starting_capital);
    for (const auto& [market_id, pp] : rt.account.positions) {
      for (const Position* p : {&pp.yes, &pp.no}) {
        if (p->qty <= 0) continue;
        auto qit = universe_.quotes.find(market_id);
        PositionView pv;
        pv.market_id = market_id;
        pv.side = p->side;
        pv.qty = p->qty;
        pv.avg_entry = p->avg_entry;
        pv.cost_basis = p->cost_basis();
        pv.mark = mark_position(*p, qit == universe_.quotes.end() ? nullptr
                                                                  : &qit->second);
        pv.opened_at = p->opened_at;
        ctx.portfolio.positions.push_back(pv);
      }
    }
    ctx.recent_settlements.assign(rt.recent_settlements.begin(),
                                  rt.recent_settlements.end());
    ctx.recent_nettings.assign(rt.recent_nettings.begin(),
                               rt.recent_nettings.end());
    ctx.learning = build_learning(rt, now);
    return ctx;
  }

  LearningSummary build_learning(const AgentRuntime& rt, std::int64_t now) const {
    std::map<std::string, std::int64_t> held_expiries;
    for (const auto& [market_id, pp] : rt.account.positions) {
      if (pp.flat()) continue;
      const SyntheticMarket* m = universe_.find(market_id);
      if (m) held_expiries[market_id] = m->spec.expiry;
    }
    return summarize_learning(rt.closed_trades, categories_, held_expiries,
                              now, cfg_.expiry_reminder_cycles * interval_);
  }

  void execute_action(AgentRuntime& rt, const CycleContext& ctx,
                      const AgentAction& action, int cycle, std::int64_t now,
                      int& order_idx) {
    const std::string& id = rt.account.agent_id;
    if (const auto* po = std::get_if<PlaceOrderAction>(&action.act)) {
      Order order;
      order.order_id = "o-" + id + "-c" + std::to_string(cycle) + "-" +
                       std::to_string(order_idx++);
      order.market_id = po->market_id;
      order.side = po->side;
      order.qty = po->qty;
      order.max_price = po->max_price;

      const SyntheticMarket* m = universe_.find(order.market_id);
      RiskVerdict verdict =
          m ? validate_order(rt.account, order, m->spec,
                             universe_.quotes.at(order.market_id), now,
                             ctx.portfolio.account_value, risk_)
            : RiskVerdict::reject(RiskReason::BadQuantity,
                                  "unknown market " + order.market_id);
      json vp{{"order", order}, {"verdict", verdict}};
      if (!action.reasoning.empty()) vp["reasoning"] = action.reasoning;
      std::int64_t vseq = log_seq(EventKind::Verdict, cycle, id, std::move(vp));
      if (!verdict.accepted) return;

      ExecutionReport rep = venue_.execute_market_order(
          order, m->spec, universe_.quotes.at(order.market_id), now);
      if (rep.filled_qty > 0 && rep.filled_qty < order.qty) {
        // A partial fill nets fewer pairs than the validated order, while its
        // fee still rounds up to a whole cent; re-check the actual fill so a
        // sliver can never overdraw the account.
        Order filled = order;
        filled.qty = rep.filled_qty;
        if (!check_solvency(rt.account, filled, rep.fill_price, rep.fee).accepted)
          rep = ExecutionReport{order.order_id, ExecStatus::RejectedRisk, 0, 0, 0};
      }
      log(EventKind::Execution, cycle, id,
          json{{"report", rep}, {"verdict_seq", vseq}});
      if (rep.filled_qty <= 0) return;

      FillOutcome fill = apply_fill(rt.account, order.market_id, order.side,
                                    rep.filled_qty, rep.fill_price, rep.fee, now);
      rt.trades_this_cycle++;
      if (fill.closed) {
        rt.closed_trades.push_back(*fill.closed);
        push_window(rt.recent_nettings, *fill.closed, cfg_.netting_window);
      }
      json payload{{"op", "fill"},
                   {"market_id", order.market_id},
                   {"category", to_string(categories_.at(order.market_id))},
                   {"side", to_string(order.side)},
                   {"qty", rep.filled_qty},
                   {"price", rep.fill_price},
                   {"fee", rep.fee},
                   {"cost", fill.cost},
                   {"netting_credit", fill.netting_credit},
                   {"cash_after", rt.account.cash},
                   {"realized_total_after", rt.account.realized_pnl_total},
                   {"pos_yes", position_state(rt.account, order.market_id, Side::YES)},
                   {"pos_no", position_state(rt.account, order.market_id, Side::NO)}};
      if (fill.closed) payload["closed_trade"] = *fill.closed;
      log(EventKind::LedgerDelta, cycle, id, std::move(payload));
      check_books(rt.account);
    } else if (const auto* rq = std::get_if<ResearchAction>(&action.act)) {
      log(EventKind::Note, cycle, id,
          json{{"op", "research"},
               {"query", rq->query},
               {"snippet", research_->research(rq->query)}});
    } else if (const auto* np = std::get_if<NotePutAction>(&action.act)) {
      json p{{"op", "note_put"}, {"key", np->key}, {"kind", to_string(np->kind)}};
      try {
        notes_.put(id, np->key, np->body, np->kind);
        p["ok"] = true;
      } catch (const std::exception& e) {
        p["ok"] = false;
        p["error"] = e.what();
      }
      log(EventKind::Note, cycle, id, std::move(p));
    } else if (const auto* ne = std::get_if<NoteEditAction>(&action.act)) {
      json p{{"op", "note_edit"}, {"key", ne->key}};
      try {
        notes_.edit(id, ne->key, ne->body);
        p["ok"] = true;
      } catch (const std::exception& e) {
        p["ok"] = false;
        p["error"] = e.what();
      }
      log(EventKind::Note, cycle, id, std::move(p));
    } else if (const auto* ns = std::get_if<NoteSearchAction>(&action.act)) {
      std::vector<std::string> keys;
      for (const Note& n : notes_.search(id, ns->query)) keys.push_back(n.key);
      log(EventKind::Note, cycle, id,
          json{{"op", "note_search"}, {"query", ns->query}, {"hits", keys}});
    } else if (const auto* dq = std::get_if<DiscoverAction>(&action.act)) {
      json p{{"op", "discover"}, {"query", dq->query}};
      try {
        p["result"] = discover(universe_, history_, dq->query, dq->quality, now);
        p["ok"] = true;
      } catch (const std::exception& e) {
        p["ok"] = false;
        p["error"] = e.what();
      }
      log(EventKind::Note, cycle, id, std::move(p));
    }
    // NoOp: nothing to do, nothing to log
  }

  RunConfig cfg_;
  std::int64_t t0_ = 0;
  std::int64_t interval_ = 0;
  Universe universe_;
  SimVenue venue_{};
  RiskConfig risk_;
  std::unique_ptr<ResearchProvider> research_;
  KnowledgeStore notes_;
  QuoteHistory history_;
  std::vector<SettlementOutcome> scheduled_;
  std::map<std::string, Category> categories_;
  std::map<std::string, AgentRuntime> agents_;
  std::optional<EventLogWriter> log_;
};

// Run a full arena: initialize accounts at starting capital, iterate the cycle
// loop, and produce per-agent metrics. Fully deterministic for a fixed
// config; pass a stream to also produce the event log.
inline RunResult run_arena(const RunConfig& cfg, std::ostream* log_stream = nullptr) {
  Orchestrator orch(cfg, log_stream);
  return orch.run();
}

} // namespace pmsim
