#pragma once

#include <algorithm>

#include "pmsim/fees.hpp"
#include "pmsim/ledger.hpp"
#include "pmsim/order.hpp"

namespace pmsim {

// Pre-trade gates. Pure verdict functions: they never mutate and never throw
// on economics. The execution path must be validate -> execute -> apply_fill,
// serialized per account.

struct RiskConfig {
  // concentration_fraction as an exact rational; default 15%.
  std::int64_t concentration_num = 15;
  std::int64_t concentration_den = 100;
  FeeSchedule fee_schedule;
};

inline void to_json(json& j, const RiskConfig& c) {
  j = json{{"concentration_num", c.concentration_num},
           {"concentration_den", c.concentration_den},
           {"fee_schedule", c.fee_schedule}};
}

inline void from_json(const json& j, RiskConfig& c) {
  RiskConfig d;
  c.concentration_num = j.value("concentration_num", d.concentration_num);
  c.concentration_den = j.value("concentration_den", d.concentration_den);
  if (j.contains("fee_schedule")) j.at("fee_schedule").get_to(c.fee_schedule);
  if (c.concentration_num <= 0 || c.concentration_den <= 0 ||
      c.concentration_num > c.concentration_den)
    throw ValidationError("concentration fraction must be in (0, 1]");
}

enum class RiskReason { None, Concentration, Insolvency, BadQuantity, MarketClosed };

inline const char* to_string(RiskReason r) {
  switch (r) {
    case RiskReason::None: return "None";
    case RiskReason::Concentration: return "Concentration";
    case RiskReason::Insolvency: return "Insolvency";
    case RiskReason::BadQuantity: return "BadQuantity";
    case RiskReason::MarketClosed: return "MarketClosed";
  }
  return "?";
}

inline RiskReason risk_reason_from_string(const std::string& s) {
  for (RiskReason r : {RiskReason::None, RiskReason::Concentration,
                       RiskReason::Insolvency, RiskReason::BadQuantity,
                       RiskReason::MarketClosed})
    if (s == to_string(r)) return r;
  throw ValidationError("unknown risk reason: " + s);
}

struct RiskVerdict {
  bool accepted = false;
  RiskReason reason = RiskReason::None;
  std::string detail;

  static RiskVerdict accept() { return {true, RiskReason::None, {}}; }
  static RiskVerdict reject(RiskReason r, std::string d) {
    return {false, r, std::move(d)};
  }
};

inline void to_json(json& j, const RiskVerdict& v) {
  j = json{{"accepted", v.accepted},
           {"reason", to_string(v.reason)},
           {"detail", v.detail}};
}

// Cost of the contracts at the price the venue would fill (fee excluded),
// truncated exactly like the ledger charge.
inline Micro order_cost(const Order& o, Micro fill_price) {
  return nano_to_micro_trunc(cost_nano(o.qty, fill_price)).micro;
}

// Per-market cap on post-trade cost basis as a fraction of cycle-start
// account value. Cost basis is what was paid, not current value. Orders that
// only reduce an existing opposite-side position are exempt: blocking exits
// at the cap would trap positions.
inline RiskVerdict check_concentration(const Account& a, const Order& o,
                                       Micro fill_price, Micro account_value,
                                       const RiskConfig& cfg) {
  MilliShares opp_qty = a.qty(o.market_id, opposite(o.side));
  if (o.qty <= opp_qty) return RiskVerdict::accept(); // fully position-reducing

  std::int64_t post_nano;
  if (opp_qty > 0) {
    // nets the whole opposite side; residual opens at the fill price
    post_nano = (o.qty - opp_qty) * fill_price;
  } else {
    const Position* same = a.position(o.market_id, o.side);
    post_nano = (same ? same->cost_basis_nano() : 0) + o.qty * fill_price;
  }
  Micro post_basis = post_nano / 1000;
  __int128 lhs = static_cast<__int128>(post_basis) * cfg.concentration_den;
  __int128 rhs = static_cast<__int128>(cfg.concentration_num) *
                 std::max<Micro>(account_value, 0);
  if (lhs <= rhs) return RiskVerdict::accept();
  return RiskVerdict::reject(
      RiskReason::Concentration,
      "post-trade basis " + format_dollars(post_basis) + " exceeds " +
          std::to_string(cfg.concentration_num * 100 / cfg.concentration_den) +
          "% of account value " + format_dollars(account_value));
}

// Cash (plus the $1.00-per-pair credit a netting order releases) must cover
// cost plus fee. Equality passes.
inline RiskVerdict check_solvency(const Account& a, const Order& o,
                                  Micro fill_price, Micro fee) {
  Micro cost = order_cost(o, fill_price);
  MilliShares pairs = std::min(o.qty, a.qty(o.market_id, opposite(o.side)));
  Micro credit = pairs * 1000;
  if (a.cash + credit >= cost + fee) return RiskVerdict::accept();
  return RiskVerdict::reject(
      RiskReason::Insolvency,
      "cash " + format_dollars(a.cash) + " + netting credit " +
          format_dollars(credit) + " < cost " + format_dollars(cost) +
          " + fee " + format_dollars(fee));
}

// Full pre-trade gate sequence; first failure wins:
// quantity/share-rule, market open, concentration, solvency.
inline RiskVerdict validate_order(const Account& a, const Order& o,
                                  const MarketSpec& spec, const QuoteTop& quote,
                                  std::int64_t now, Micro account_value,
                                  const RiskConfig& cfg) {
  if (o.qty <= 0)
    return RiskVerdict::reject(RiskReason::BadQuantity, "qty must be positive");
  if (spec.venue_mode == ShareRule::WholeShare && o.qty % kSharesScale != 0)
    return RiskVerdict::reject(
        RiskReason::BadQuantity,
        "venue requires whole shares, got " + std::to_string(o.qty) + " msh");
  if (now >= spec.expiry)
    return RiskVerdict::reject(RiskReason::MarketClosed,
                               spec.market_id + " expired");
  Micro fill_price = quote.ask(o.side);
  RiskVerdict v = check_concentration(a, o, fill_price, account_value, cfg);
  if (!v.accepted) return v;
  Micro fee = compute_fee(cfg.fee_schedule, fill_price, o.qty);
  return check_solvency(a, o, fill_price, fee);
}

} // namespace pmsim
