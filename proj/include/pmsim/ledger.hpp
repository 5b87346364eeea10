#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "pmsim/market.hpp"

namespace pmsim {

// Double-entry accounting for one agent. All flows are integer micro-dollars;
// intermediate products are exact in nano-dollars (qty * price). Whenever a
// nano amount is truncated into micro-dollars the discarded remainder goes to
// the account's dust counter, which keeps the conservation identity exact:
//
//   1000*(cash - starting_capital) + sum(qty*avg_entry)
//     - 1000*realized_pnl_total + 1000*(fees_paid - fees_attributed)
//     + dust_nano == 0
//
// after every operation. fees_attributed are the fees folded into netting
// ClosedTrades; fees on opening fills stay unattributed until never (they are
// a cost of the open position, not of any closed trade).

struct LedgerError : ValidationError {
  using ValidationError::ValidationError;
};

struct Position {
  Side side = Side::YES;
  MilliShares qty = 0;
  Micro avg_entry = 0;
  std::int64_t opened_at = 0;

  std::int64_t cost_basis_nano() const { return qty * avg_entry; }
  Micro cost_basis() const { return qty * avg_entry / 1000; }
};

struct PositionPair {
  Position yes{Side::YES};
  Position no{Side::NO};

  Position& get(Side s) { return s == Side::YES ? yes : no; }
  const Position& get(Side s) const { return s == Side::YES ? yes : no; }
  bool flat() const { return yes.qty == 0 && no.qty == 0; }
};

enum class ExitType { Netting, Settlement };

inline const char* to_string(ExitType e) {
  return e == ExitType::Netting ? "Netting" : "Settlement";
}

inline ExitType exit_type_from_string(const std::string& s) {
  if (s == "Netting") return ExitType::Netting;
  if (s == "Settlement") return ExitType::Settlement;
  throw ValidationError("unknown exit type: " + s);
}

struct ClosedTrade {
  std::string market_id;
  ExitType exit_type = ExitType::Netting;
  MilliShares qty_closed = 0;
  Micro realized_pnl = 0; // fees included for netting exits
  std::int64_t opened_at = 0;
  std::int64_t closed_at = 0;
};

struct SettlementRecord {
  std::string market_id;
  Side side_held = Side::YES;
  Outcome outcome = Outcome::NO;
  MilliShares qty = 0;
  Micro realized_pnl = 0;
  std::int64_t settled_at = 0;
};

struct Account {
  std::string agent_id;
  Micro starting_capital = 10'000 * kMicroPerDollar;
  Micro cash = starting_capital;
  Micro realized_pnl_total = 0;
  Micro fees_paid_total = 0;
  Micro fees_attributed_total = 0;
  std::int64_t dust_nano = 0;
  std::map<std::string, PositionPair> positions;
  std::set<std::string> settled_markets; // apply_settlement idempotency guard

  explicit Account(std::string id = {}, Micro capital = 10'000 * kMicroPerDollar)
      : agent_id(std::move(id)), starting_capital(capital), cash(capital) {}

  const Position* position(const std::string& market_id, Side s) const {
    auto it = positions.find(market_id);
    if (it == positions.end()) return nullptr;
    const Position& p = it->second.get(s);
    return p.qty > 0 ? &p : nullptr;
  }

  MilliShares qty(const std::string& market_id, Side s) const {
    const Position* p = position(market_id, s);
    return p ? p->qty : 0;
  }
};

// Sum of cost basis across both sides of one market (micro-dollars).
inline Micro cost_basis_in_market(const Account& a, const std::string& market_id) {
  auto it = a.positions.find(market_id);
  if (it == a.positions.end()) return 0;
  return it->second.yes.cost_basis() + it->second.no.cost_basis();
}

inline Micro total_cost_basis(const Account& a) {
  Micro sum = 0;
  for (const auto& [id, pp] : a.positions)
    sum += pp.yes.cost_basis() + pp.no.cost_basis();
  return sum;
}

// Exact conservation residual in nano-dollars; zero when the books balance.
inline std::int64_t conservation_residual_nano(const Account& a) {
  std::int64_t cb_nano = 0;
  for (const auto& [id, pp] : a.positions)
    cb_nano += pp.yes.cost_basis_nano() + pp.no.cost_basis_nano();
  std::int64_t unattributed = a.fees_paid_total - a.fees_attributed_total;
  return 1000 * (a.cash - a.starting_capital) + cb_nano -
         1000 * a.realized_pnl_total + 1000 * unattributed + a.dust_nano;
}

struct FillOutcome {
  Micro cost = 0;           // charged for the contracts, fee excluded
  Micro fee = 0;
  Micro netting_credit = 0; // cash released by paired contracts
  std::optional<ClosedTrade> closed;
};

// Apply an executed fill: buy `qty` milli-shares of `side` at `price`.
// An opposite-side holding nets pair-by-pair (each pair releases $1.00);
// a same-side holding re-averages the entry. Solvency is the risk module's
// responsibility; this never rejects on economics.
inline FillOutcome apply_fill(Account& a, const std::string& market_id,
                              Side side, MilliShares qty, Micro price,
                              Micro fee, std::int64_t now) {
  if (qty <= 0) throw LedgerError("apply_fill: qty must be positive");
  if (price < 0 || price > kMicroPerDollar)
    throw LedgerError("apply_fill: price out of [0, $1]");
  if (fee < 0) throw LedgerError("apply_fill: negative fee");
  if (market_id.empty()) throw LedgerError("apply_fill: missing market");

  FillOutcome out;
  auto [cost, cost_rem] = nano_to_micro_trunc(cost_nano(qty, price));
  out.cost = cost;
  out.fee = fee;
  a.cash -= cost + fee;
  a.dust_nano -= cost_rem;
  a.fees_paid_total += fee;

  PositionPair& pp = a.positions[market_id];
  Position& opp = pp.get(opposite(side));
  Position& same = pp.get(side);

  MilliShares remaining = qty;
  if (opp.qty > 0) {
    MilliShares pairs = std::min(opp.qty, qty);
    Micro credit = pairs * 1000; // pairs * $1.00 per share, exact
    a.cash += credit;
    out.netting_credit = credit;

    std::int64_t realized_nano = pairs * (kMicroPerDollar - opp.avg_entry - price);
    auto [realized, rrem] = nano_to_micro_trunc(realized_nano);
    a.dust_nano -= rrem;
    realized -= fee;
    a.fees_attributed_total += fee;
    a.realized_pnl_total += realized;

    ClosedTrade ct;
    ct.market_id = market_id;
    ct.exit_type = ExitType::Netting;
    ct.qty_closed = pairs;
    ct.realized_pnl = realized;
    ct.opened_at = opp.opened_at;
    ct.closed_at = now;
    out.closed = ct;

    opp.qty -= pairs;
    if (opp.qty == 0) {
      opp.avg_entry = 0;
      opp.opened_at = 0;
    }
    remaining = qty - pairs;
    if (remaining == 0) return out;
  }

  if (same.qty > 0) {
    std::int64_t num = same.qty * same.avg_entry + remaining * price;
    MilliShares den = same.qty + remaining;
    Micro new_avg = rhe_div(num, den);
    a.dust_nano -= den * new_avg - num; // re-average rounding perturbation
    same.qty = den;
    same.avg_entry = new_avg;
  } else {
    same.qty = remaining;
    same.avg_entry = price;
    same.opened_at = now;
  }
  return out;
}

struct SettlementApplied {
  Micro payout = 0; // cash credited (winning payout or VOID refund)
  ClosedTrade closed;
  SettlementRecord record;
};

// Resolve a market against this account. Winning contracts pay $1.00 per
// share, losers pay zero, VOID refunds cost basis. No-op (nullopt) when the
// account has no position; a repeat settlement of the same market throws.
inline std::optional<SettlementApplied> apply_settlement(
    Account& a, const SettlementOutcome& o) {
  if (a.settled_markets.count(o.market_id))
    throw LedgerError("apply_settlement: " + o.market_id +
                      " already settled for " + a.agent_id);
  a.settled_markets.insert(o.market_id);

  auto it = a.positions.find(o.market_id);
  if (it == a.positions.end() || it->second.flat()) {
    if (it != a.positions.end()) a.positions.erase(it);
    return std::nullopt;
  }
  PositionPair& pp = it->second;
  Position& held = pp.yes.qty > 0 ? pp.yes : pp.no;

  SettlementApplied res;
  Micro realized = 0;
  if (o.outcome == Outcome::VOID) {
    auto [refund, crem] = nano_to_micro_trunc(held.cost_basis_nano());
    a.cash += refund;
    a.dust_nano += crem; // refund truncated toward zero
    res.payout = refund;
    realized = 0;
  } else {
    bool won = (o.outcome == Outcome::YES) == (held.side == Side::YES);
    Micro payout = won ? held.qty * 1000 : 0;
    a.cash += payout;
    res.payout = payout;
    std::int64_t realized_nano = 1000 * payout - held.cost_basis_nano();
    auto [r, rrem] = nano_to_micro_trunc(realized_nano);
    a.dust_nano -= rrem;
    realized = r;
    a.realized_pnl_total += realized;
  }

  res.closed.market_id = o.market_id;
  res.closed.exit_type = ExitType::Settlement;
  res.closed.qty_closed = held.qty;
  res.closed.realized_pnl = realized;
  res.closed.opened_at = held.opened_at;
  res.closed.closed_at = o.settled_at;

  res.record.market_id = o.market_id;
  res.record.side_held = held.side;
  res.record.outcome = o.outcome;
  res.record.qty = held.qty;
  res.record.realized_pnl = realized;
  res.record.settled_at = o.settled_at;

  a.positions.erase(it);
  return res;
}

// --- JSON ---

inline void to_json(json& j, const Position& p) {
  j = json{{"side", to_string(p.side)},
           {"qty", p.qty},
           {"avg_entry", p.avg_entry},
           {"opened_at", p.opened_at}};
}

inline void from_json(const json& j, Position& p) {
  p.side = side_from_string(j.at("side").get<std::string>());
  j.at("qty").get_to(p.qty);
  j.at("avg_entry").get_to(p.avg_entry);
  j.at("opened_at").get_to(p.opened_at);
}

inline void to_json(json& j, const ClosedTrade& t) {
  j = json{{"market_id", t.market_id},
           {"exit_type", to_string(t.exit_type)},
           {"qty_closed", t.qty_closed},
           {"realized_pnl", t.realized_pnl},
           {"opened_at", t.opened_at},
           {"closed_at", t.closed_at}};
}

inline void from_json(const json& j, ClosedTrade& t) {
  j.at("market_id").get_to(t.market_id);
  t.exit_type = exit_type_from_string(j.at("exit_type").get<std::string>());
  j.at("qty_closed").get_to(t.qty_closed);
  j.at("realized_pnl").get_to(t.realized_pnl);
  j.at("opened_at").get_to(t.opened_at);
  j.at("closed_at").get_to(t.closed_at);
}

inline void to_json(json& j, const SettlementRecord& r) {
  j = json{{"market_id", r.market_id},
           {"side_held", to_string(r.side_held)},
           {"outcome", to_string(r.outcome)},
           {"qty", r.qty},
           {"realized_pnl", r.realized_pnl},
           {"settled_at", r.settled_at}};
}

inline void from_json(const json& j, SettlementRecord& r) {
  j.at("market_id").get_to(r.market_id);
  r.side_held = side_from_string(j.at("side_held").get<std::string>());
  r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  j.at("qty").get_to(r.qty);
  j.at("realized_pnl").get_to(r.realized_pnl);
  j.at("settled_at").get_to(r.settled_at);
}

} // namespace pmsim
