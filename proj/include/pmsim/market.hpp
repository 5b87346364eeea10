#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "pmsim/money.hpp"

namespace pmsim {

using json = nlohmann::json;

enum class Category {
  Financial,
  Crypto,
  Weather,
  Politics,
  Entertainment,
  Sports,
  MetaAI,
};

inline constexpr std::array<Category, 7> kAllCategories = {
    Category::Financial,     Category::Crypto,  Category::Weather,
    Category::Politics,      Category::Entertainment,
    Category::Sports,        Category::MetaAI,
};

inline const char* to_string(Category c) {
  switch (c) {
    case Category::Financial: return "Financial";
    case Category::Crypto: return "Crypto";
    case Category::Weather: return "Weather";
    case Category::Politics: return "Politics";
    case Category::Entertainment: return "Entertainment";
    case Category::Sports: return "Sports";
    case Category::MetaAI: return "MetaAI";
  }
  return "?";
}

inline Category category_from_string(const std::string& s) {
  for (Category c : kAllCategories)
    if (s == to_string(c)) return c;
  throw ValidationError("unknown category: " + s);
}

enum class ShareRule { WholeShare, FractionalShare };

inline const char* to_string(ShareRule r) {
  return r == ShareRule::WholeShare ? "WholeShare" : "FractionalShare";
}

inline ShareRule share_rule_from_string(const std::string& s) {
  if (s == "WholeShare") return ShareRule::WholeShare;
  if (s == "FractionalShare") return ShareRule::FractionalShare;
  throw ValidationError("unknown share rule: " + s);
}

enum class Side { YES, NO };

inline const char* to_string(Side s) { return s == Side::YES ? "YES" : "NO"; }

inline Side side_from_string(const std::string& s) {
  if (s == "YES") return Side::YES;
  if (s == "NO") return Side::NO;
  throw ValidationError("unknown side: " + s);
}

inline Side opposite(Side s) { return s == Side::YES ? Side::NO : Side::YES; }

enum class Outcome { YES, NO, VOID };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::YES: return "YES";
    case Outcome::NO: return "NO";
    case Outcome::VOID: return "VOID";
  }
  return "?";
}

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "YES") return Outcome::YES;
  if (s == "NO") return Outcome::NO;
  if (s == "VOID") return Outcome::VOID;
  throw ValidationError("unknown outcome: " + s);
}

struct MarketSpec {
  std::string market_id;
  std::string series_id;
  Category category = Category::Financial;
  std::string title;
  std::string settlement_rule;
  std::int64_t listed_at = 0; // epoch seconds, UTC
  std::int64_t expiry = 0;    // epoch seconds, UTC; strictly after listed_at
  ShareRule venue_mode = ShareRule::WholeShare;
  Micro tick = 10'000;        // must divide 1,000,000
  Ppm true_prob = 500'000;    // synthetic only; never exposed to agents
};

inline void validate(const MarketSpec& m) {
  if (m.market_id.empty()) throw ValidationError("market_id empty");
  if (m.expiry <= m.listed_at)
    throw ValidationError(m.market_id + ": expiry must be after listing");
  if (m.tick <= 0 || kMicroPerDollar % m.tick != 0)
    throw ValidationError(m.market_id + ": tick must divide 1,000,000");
  if (m.true_prob < 0 || m.true_prob > kPpmOne)
    throw ValidationError(m.market_id + ": true_prob out of [0,1]");
}

struct QuoteTop {
  std::string market_id;
  Micro yes_bid = 0;
  Micro yes_ask = 0;
  Micro no_bid = 0;
  Micro no_ask = 0;
  MilliShares yes_bid_size = 0;
  MilliShares yes_ask_size = 0;
  std::optional<Micro> last_price;
  MilliShares volume = 0; // cumulative
  std::int64_t as_of = 0;

  Micro bid(Side s) const { return s == Side::YES ? yes_bid : no_bid; }
  Micro ask(Side s) const { return s == Side::YES ? yes_ask : no_ask; }
  // A resting YES bid is the counterparty for a NO buyer, and vice versa.
  MilliShares displayed_ask_size(Side s) const {
    return s == Side::YES ? yes_ask_size : yes_bid_size;
  }
};

inline void validate(const QuoteTop& q) {
  auto in_range = [](Micro p) { return p >= 0 && p <= kMicroPerDollar; };
  if (!in_range(q.yes_bid) || !in_range(q.yes_ask) || !in_range(q.no_bid) ||
      !in_range(q.no_ask))
    throw ValidationError(q.market_id + ": quote outside [0, $1]");
  if (q.yes_bid > q.yes_ask || q.no_bid > q.no_ask)
    throw ValidationError(q.market_id + ": crossed quote");
  if (q.yes_bid_size < 0 || q.yes_ask_size < 0 || q.volume < 0)
    throw ValidationError(q.market_id + ": negative size");
}

// Fill in the NO side of a quote from the YES side using the binary-contract
// identity (the two sides of one book): no_bid = $1 - yes_ask,
// no_ask = $1 - yes_bid. YES fields pass through unchanged.
inline QuoteTop derive_complement(QuoteTop q) {
  if (q.yes_bid < 0 || q.yes_ask > kMicroPerDollar || q.yes_bid > q.yes_ask)
    throw ValidationError(q.market_id + ": malformed YES quote");
  q.no_bid = kMicroPerDollar - q.yes_ask;
  q.no_ask = kMicroPerDollar - q.yes_bid;
  return q;
}

struct SettlementOutcome {
  std::string market_id;
  Outcome outcome = Outcome::NO;
  std::int64_t settled_at = 0;
};

// Curated series used as seed data when generating synthetic universes.
struct SeriesSeed {
  const char* ticker;
  Category category;
  const char* title;
};

inline constexpr std::array<SeriesSeed, 29> kSeriesSeeds = {{
    {"KXINX", Category::Financial, "S&P 500 closing level today"},
    {"KXNASDAQ100U", Category::Financial, "Nasdaq-100 closes up today"},
    {"KXEURUSDH", Category::Financial, "EUR/USD above threshold this hour"},
    {"KXFEDCOMBO", Category::Financial, "Fed decision combination this meeting"},
    {"KXCPIYOY", Category::Financial, "CPI year-over-year above threshold"},
    {"KXAAAGASW", Category::Financial, "AAA gas price above threshold this week"},
    {"KXU3", Category::Financial, "Unemployment rate above threshold"},
    {"KXBTCD", Category::Crypto, "Bitcoin daily close above threshold"},
    {"KXETH", Category::Crypto, "Ethereum price above threshold"},
    {"KXXRPD", Category::Crypto, "XRP daily close above threshold"},
    {"KXSHIBAD", Category::Crypto, "Shiba Inu daily close above threshold"},
    {"KXHIGHNY", Category::Weather, "High temperature in New York today"},
    {"KXHIGHMIA", Category::Weather, "High temperature in Miami today"},
    {"KXLOWTDEN", Category::Weather, "Low temperature in Denver today"},
    {"KXDCSNOWM", Category::Weather, "Snowfall in Washington DC this month"},
    {"KXHMONTH", Category::Weather, "Monthly high temperature record"},
    {"KXGREENLAND", Category::Politics, "Greenland status change announced"},
    {"KXIMPEACH", Category::Politics, "Impeachment proceedings opened"},
    {"KXUSAEXPANDTERRITORY", Category::Politics, "US territory expansion declared"},
    {"KXTRUMPSAY", Category::Politics, "Named phrase said in public remarks today"},
    {"KXTRUMPSAYMONTH", Category::Politics, "Named phrase said in public remarks this month"},
    {"KXNETFLIXRANKSHOW", Category::Entertainment, "Netflix top-ranked show this week"},
    {"KXOSCARACTO", Category::Entertainment, "Oscar best actor winner"},
    {"KXGRAMSOTY", Category::Entertainment, "Grammy song of the year winner"},
    {"KXSB", Category::Sports, "Super Bowl champion"},
    {"KXNFLSBMVP", Category::Sports, "Super Bowl MVP"},
    {"KXNBA", Category::Sports, "NBA championship winner"},
    {"KXTOPMODEL", Category::MetaAI, "Top-ranked model on public leaderboard"},
    {"KXLAYOFFSYINFO", Category::MetaAI, "Major tech layoffs announced"},
}};

// --- JSON ---

inline void to_json(json& j, const MarketSpec& m) {
  j = json{{"market_id", m.market_id},
           {"series_id", m.series_id},
           {"category", to_string(m.category)},
           {"title", m.title},
           {"settlement_rule", m.settlement_rule},
           {"listed_at", m.listed_at},
           {"expiry", m.expiry},
           {"venue_mode", to_string(m.venue_mode)},
           {"tick", m.tick},
           {"true_prob", m.true_prob}};
}

inline void from_json(const json& j, MarketSpec& m) {
  j.at("market_id").get_to(m.market_id);
  j.at("series_id").get_to(m.series_id);
  m.category = category_from_string(j.at("category").get<std::string>());
  j.at("title").get_to(m.title);
  j.at("settlement_rule").get_to(m.settlement_rule);
  j.at("listed_at").get_to(m.listed_at);
  j.at("expiry").get_to(m.expiry);
  m.venue_mode = share_rule_from_string(j.at("venue_mode").get<std::string>());
  j.at("tick").get_to(m.tick);
  j.at("true_prob").get_to(m.true_prob);
}

inline void to_json(json& j, const QuoteTop& q) {
  j = json{{"market_id", q.market_id}, {"yes_bid", q.yes_bid},
           {"yes_ask", q.yes_ask},     {"no_bid", q.no_bid},
           {"no_ask", q.no_ask},       {"yes_bid_size", q.yes_bid_size},
           {"yes_ask_size", q.yes_ask_size}, {"volume", q.volume},
           {"as_of", q.as_of}};
  if (q.last_price) j["last_price"] = *q.last_price;
}

inline void from_json(const json& j, QuoteTop& q) {
  j.at("market_id").get_to(q.market_id);
  j.at("yes_bid").get_to(q.yes_bid);
  j.at("yes_ask").get_to(q.yes_ask);
  j.at("no_bid").get_to(q.no_bid);
  j.at("no_ask").get_to(q.no_ask);
  j.at("yes_bid_size").get_to(q.yes_bid_size);
  j.at("yes_ask_size").get_to(q.yes_ask_size);
  j.at("volume").get_to(q.volume);
  j.at("as_of").get_to(q.as_of);
  if (j.contains("last_price"))
    q.last_price = j.at("last_price").get<Micro>();
  else
    q.last_price.reset();
}

inline void to_json(json& j, const SettlementOutcome& s) {
  j = json{{"market_id", s.market_id},
           {"outcome", to_string(s.outcome)},
           {"settled_at", s.settled_at}};
}

inline void from_json(const json& j, SettlementOutcome& s) {
  j.at("market_id").get_to(s.market_id);
  s.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  j.at("settled_at").get_to(s.settled_at);
}

} // namespace pmsim
