#pragma once

#include <string>

#include "pmsim/market.hpp"

namespace pmsim {

// A marketable buy order: taker-only, fills at the displayed ask. max_price
// is the worst ask the agent will accept; the venue rejects when the ask is
// above it (no counterparty at an acceptable price).
struct Order {
  std::string order_id;
  std::string market_id;
  Side side = Side::YES;
  MilliShares qty = 0;
  Micro max_price = kMicroPerDollar;
};

inline void to_json(json& j, const Order& o) {
  j = json{{"order_id", o.order_id},
           {"market_id", o.market_id},
           {"side", to_string(o.side)},
           {"qty", o.qty},
           {"max_price", o.max_price}};
}

inline void from_json(const json& j, Order& o) {
  j.at("order_id").get_to(o.order_id);
  j.at("market_id").get_to(o.market_id);
  o.side = side_from_string(j.at("side").get<std::string>());
  j.at("qty").get_to(o.qty);
  j.at("max_price").get_to(o.max_price);
}

} // namespace pmsim
