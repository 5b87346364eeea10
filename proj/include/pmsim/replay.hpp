#pragma once

#include "pmsim/eventlog.hpp"
#include "pmsim/metrics.hpp"
#include "pmsim/orchestrator.hpp"

namespace pmsim {

// Rebuild a RunResult from the event log alone — no re-simulation. Ledger
// deltas carry post-operation account state and quote updates carry marks,
// so cycle snapshots can be taken verbatim or, when Snapshot events were
// stripped, recomputed cycle by cycle from first principles.

inline RunResult replay(const LogContents& log) {
  RunResult res;
  if (!log.header.is_object()) return res; // empty log, empty result
  if (log.version != kLogVersion)
    throw LogError("replay: log version " + std::to_string(log.version) +
                   " != supported " + std::to_string(kLogVersion));

  res.starting_capital = log.header.value("starting_capital", Micro{0});
  res.t0 = log.header.value("t0", std::int64_t{0});
  res.interval_secs = log.header.value("interval_secs", std::int64_t{0});
  if (log.header.contains("agent_ids"))
    res.agent_order = log.header.at("agent_ids").get<std::vector<std::string>>();

  struct Books {
    Micro cash = 0;
    Micro realized = 0;
    std::map<std::string, PositionPair> positions;
    std::int64_t fills_this_cycle = 0;
    bool snapshot_seen = false;
  };
  std::map<std::string, Books> books;
  for (const std::string& id : res.agent_order) {
    books[id].cash = res.starting_capital;
    res.per_agent[id]; // present even for agents that never traded
  }
  std::map<std::string, QuoteTop> quotes;

  std::int64_t n_cycles = log.header.value("n_cycles", std::int64_t{0});
  std::size_t i = 0;
  for (std::int64_t cycle = 0; cycle < n_cycles; ++cycle) {
    for (auto& [id, b] : books) {
      b.fills_this_cycle = 0;
      b.snapshot_seen = false;
    }
    for (; i < log.events.size() && log.events[i].cycle_index == cycle; ++i) {
      const EventRecord& e = log.events[i];
      switch (e.kind) {
        case EventKind::QuoteUpdate: {
          QuoteTop q = e.payload.get<QuoteTop>();
          quotes[q.market_id] = std::move(q);
          break;
        }
        case EventKind::LedgerDelta: {
          const std::string& id = *e.agent_id;
          Books& b = books[id];
          b.cash = e.payload.at("cash_after").get<Micro>();
          b.realized = e.payload.at("realized_total_after").get<Micro>();
          const std::string market = e.payload.at("market_id").get<std::string>();
          res.categories[market] =
              category_from_string(e.payload.at("category").get<std::string>());
          PositionPair& pp = b.positions[market];
          pp.yes = e.payload.at("pos_yes").get<Position>();
          pp.no = e.payload.at("pos_no").get<Position>();
          if (e.payload.contains("closed_trade"))
            res.per_agent[id].closed_trades.push_back(
                e.payload.at("closed_trade").get<ClosedTrade>());
          break;
        }
        case EventKind::Execution: {
          ExecutionReport rep = e.payload.at("report").get<ExecutionReport>();
          if (rep.filled_qty > 0) books[*e.agent_id].fills_this_cycle++;
          break;
        }
        case EventKind::Snapshot: {
          CycleSnapshot s = e.payload.get<CycleSnapshot>();
          books[s.agent_id].snapshot_seen = true;
          res.per_agent[s.agent_id].snapshots.push_back(std::move(s));
          break;
        }
        default:
          break;
      }
    }
    // cycle complete; synthesize any missing snapshots from current state
    std::int64_t as_of = res.t0 + (cycle + 1) * res.interval_secs;
    for (const std::string& id : res.agent_order) {
      Books& b = books[id];
      if (b.snapshot_seen) continue;
      CycleSnapshot s;
      s.agent_id = id;
      s.cycle_index = cycle;
      s.as_of = as_of;
      s.cash = b.cash;
      Micro value = b.cash;
      std::int64_t stale = 0;
      for (const auto& [market, pp] : b.positions) {
        if (pp.flat()) continue;
        auto q = quotes.find(market);
        const QuoteTop* qp = q == quotes.end() ? nullptr : &q->second;
        value += mark_position(pp.yes, qp);
        value += mark_position(pp.no, qp);
        if (qp == nullptr || qp->as_of < as_of) ++stale;
      }
      s.account_value = value;
      s.realized_pnl_total = b.realized;
      s.unrealized_pnl = value - res.starting_capital - b.realized;
      s.trades_this_cycle = b.fills_this_cycle;
      s.stale_marks = stale;
      res.per_agent[id].snapshots.push_back(std::move(s));
    }
  }

  for (const std::string& id : res.agent_order) {
    AgentResult& ar = res.per_agent[id];
    std::vector<Micro> values;
    values.reserve(ar.snapshots.size());
    for (const CycleSnapshot& s : ar.snapshots) values.push_back(s.account_value);
    ar.metrics = build_metrics(id, values, res.starting_capital,
                               ar.closed_trades, res.categories);
  }
  return res;
}

inline RunResult replay_file(const std::string& path) {
  return replay(read_log(path));
}

// Log-walking cash audit: every micro-dollar of cash movement must be
// attributable to exactly one flow (fill cost, fee, netting credit,
// settlement payout or void refund). Throws on the first discrepancy.
inline void audit_cash_attribution(const LogContents& log) {
  Micro starting = log.header.is_object()
                       ? log.header.value("starting_capital", Micro{0})
                       : 0;
  std::map<std::string, Micro> cash;
  for (const EventRecord& e : log.events) {
    if (e.kind != EventKind::LedgerDelta) continue;
    const std::string& id = *e.agent_id;
    if (!cash.count(id)) cash[id] = starting;
    Micro delta = 0;
    const std::string op = e.payload.at("op").get<std::string>();
    if (op == "fill") {
      delta = -e.payload.at("cost").get<Micro>() -
              e.payload.at("fee").get<Micro>() +
              e.payload.at("netting_credit").get<Micro>();
    } else if (op == "settlement") {
      delta = e.payload.at("payout").get<Micro>();
    } else {
      throw LogError("audit: unknown ledger op '" + op + "' at seq " +
                     std::to_string(e.seq));
    }
    Micro expected = cash[id] + delta;
    Micro actual = e.payload.at("cash_after").get<Micro>();
    if (expected != actual)
      throw LogError("audit: unattributed cash movement at seq " +
                     std::to_string(e.seq) + " for " + id + ": expected " +
                     std::to_string(expected) + " got " +
                     std::to_string(actual));
    cash[id] = actual;
  }
}

} // namespace pmsim
