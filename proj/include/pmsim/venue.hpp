#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "pmsim/fees.hpp"
#include "pmsim/order.hpp"

namespace pmsim {

enum class ExecMode { Paper, LiveFidelity };

inline const char* to_string(ExecMode m) {
  return m == ExecMode::Paper ? "Paper" : "LiveFidelity";
}

inline ExecMode exec_mode_from_string(const std::string& s) {
  if (s == "Paper") return ExecMode::Paper;
  if (s == "LiveFidelity") return ExecMode::LiveFidelity;
  throw ValidationError("unknown execution mode: " + s);
}

struct VenueConfig {
  ExecMode execution_mode = ExecMode::Paper;
  FeeSchedule fee_schedule;
  ShareRule share_rule = ShareRule::WholeShare;
};

inline void to_json(json& j, const VenueConfig& c) {
  j = json{{"execution_mode", to_string(c.execution_mode)},
           {"fee_schedule", c.fee_schedule},
           {"share_rule", to_string(c.share_rule)}};
}

inline void from_json(const json& j, VenueConfig& c) {
  if (j.contains("execution_mode"))
    c.execution_mode = exec_mode_from_string(j.at("execution_mode").get<std::string>());
  if (j.contains("fee_schedule")) j.at("fee_schedule").get_to(c.fee_schedule);
  if (j.contains("share_rule"))
    c.share_rule = share_rule_from_string(j.at("share_rule").get<std::string>());
}

enum class ExecStatus { Filled, PartialFill, RejectedNoCounterparty, RejectedRisk };

inline const char* to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::Filled: return "Filled";
    case ExecStatus::PartialFill: return "PartialFill";
    case ExecStatus::RejectedNoCounterparty: return "RejectedNoCounterparty";
    case ExecStatus::RejectedRisk: return "RejectedRisk";
  }
  return "?";
}

inline ExecStatus exec_status_from_string(const std::string& s) {
  for (ExecStatus e : {ExecStatus::Filled, ExecStatus::PartialFill,
                       ExecStatus::RejectedNoCounterparty, ExecStatus::RejectedRisk})
    if (s == to_string(e)) return e;
  throw ValidationError("unknown execution status: " + s);
}

struct ExecutionReport {
  std::string order_id;
  ExecStatus status = ExecStatus::RejectedRisk;
  MilliShares filled_qty = 0;
  Micro fill_price = 0;
  Micro fee = 0;
};

inline void to_json(json& j, const ExecutionReport& r) {
  j = json{{"order_id", r.order_id},
           {"status", to_string(r.status)},
           {"filled_qty", r.filled_qty},
           {"fill_price", r.fill_price},
           {"fee", r.fee}};
}

inline void from_json(const json& j, ExecutionReport& r) {
  j.at("order_id").get_to(r.order_id);
  r.status = exec_status_from_string(j.at("status").get<std::string>());
  j.at("filled_qty").get_to(r.filled_qty);
  j.at("fill_price").get_to(r.fill_price);
  j.at("fee").get_to(r.fee);
}

// Seam for a real exchange adapter. The simulator below is the only shipped
// implementation.
class Venue {
public:
  virtual ~Venue() = default;
  virtual ExecutionReport execute_market_order(const Order& order,
                                               const MarketSpec& spec,
                                               const QuoteTop& quote,
                                               std::int64_t now) = 0;
  virtual std::vector<SettlementOutcome> settle_due(
      std::int64_t now, std::span<const SettlementOutcome> scheduled) = 0;
};

// Taker-only immediate execution against top-of-book.
//   Paper: fills the full quantity at the ask, ignoring displayed size.
//   LiveFidelity: fills at most the displayed size, which depletes as fills
//   consume it within a cycle (refresh_depth resets it from each new quote).
class SimVenue : public Venue {
public:
  explicit SimVenue(VenueConfig cfg = {}) : cfg_(std::move(cfg)) {}

  const VenueConfig& config() const { return cfg_; }

  // Call once per market per cycle after the quote sync.
  void refresh_depth(const QuoteTop& q) {
    depth_[q.market_id] = {q.displayed_ask_size(Side::YES),
                           q.displayed_ask_size(Side::NO)};
  }

  ExecutionReport execute_market_order(const Order& order,
                                       const MarketSpec& spec,
                                       const QuoteTop& quote,
                                       std::int64_t now) override {
    ExecutionReport rep;
    rep.order_id = order.order_id;
    if (order.qty <= 0 || now >= spec.expiry) {
      rep.status = ExecStatus::RejectedRisk; // defense in depth: risk owns this
      return rep;
    }
    Micro ask = quote.ask(order.side);
    if (ask > order.max_price) {
      rep.status = ExecStatus::RejectedNoCounterparty;
      return rep;
    }
    MilliShares filled = order.qty;
    if (cfg_.execution_mode == ExecMode::LiveFidelity) {
      MilliShares avail = remaining_depth(order.market_id, order.side, quote);
      filled = std::min(order.qty, avail);
      if (filled <= 0) {
        rep.status = ExecStatus::RejectedNoCounterparty;
        return rep;
      }
      consume_depth(order.market_id, order.side, filled);
    }
    rep.status = filled == order.qty ? ExecStatus::Filled : ExecStatus::PartialFill;
    rep.filled_qty = filled;
    rep.fill_price = ask;
    rep.fee = compute_fee(cfg_.fee_schedule, ask, filled);
    return rep;
  }

  // Emit each scheduled settlement exactly once, in market_id order, when
  // its settle time has been reached. `now` must be monotone across calls.
  std::vector<SettlementOutcome> settle_due(
      std::int64_t now,
      std::span<const SettlementOutcome> scheduled) override {
    std::vector<SettlementOutcome> due;
    for (const SettlementOutcome& s : scheduled) {
      if (s.settled_at <= now && !emitted_.count(s.market_id)) due.push_back(s);
    }
    std::sort(due.begin(), due.end(),
              [](const SettlementOutcome& a, const SettlementOutcome& b) {
                return a.market_id < b.market_id;
              });
    for (const SettlementOutcome& s : due) emitted_.insert(s.market_id);
    return due;
  }

private:
  struct SideDepth {
    MilliShares yes_ask = 0;
    MilliShares no_ask = 0;
  };

  MilliShares remaining_depth(const std::string& market_id, Side side,
                              const QuoteTop& quote) {
    auto it = depth_.find(market_id);
    if (it == depth_.end()) {
      refresh_depth(quote);
      it = depth_.find(market_id);
    }
    return side == Side::YES ? it->second.yes_ask : it->second.no_ask;
  }

  void consume_depth(const std::string& market_id, Side side, MilliShares qty) {
    SideDepth& d = depth_[market_id];
    (side == Side::YES ? d.yes_ask : d.no_ask) -= qty;
  }

  VenueConfig cfg_;
  std::map<std::string, SideDepth> depth_;
  std::set<std::string> emitted_;
};

} // namespace pmsim
