#pragma once

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "pmsim/discovery.hpp"
#include "pmsim/knowledge.hpp"
#include "pmsim/ledger.hpp"
#include "pmsim/metrics.hpp"

namespace pmsim {

// What an agent sees each cycle. Deliberately reconstructible from the event
// log, and deliberately free of anything hidden: no true probabilities, no
// scheduled outcomes. Oracle-style agents get their privileged data through
// explicit construction-time injection, never through this context.

struct MarketView {
  std::string market_id;
  std::string series_id;
  Category category = Category::Financial;
  std::string title;
  std::string settlement_rule;
  std::int64_t expiry = 0;
  ShareRule venue_mode = ShareRule::WholeShare;
  Micro tick = 0;
  QuoteTop quote;
};

inline MarketView make_market_view(const MarketSpec& spec, const QuoteTop& q) {
  return MarketView{spec.market_id, spec.series_id, spec.category,
                    spec.title,     spec.settlement_rule, spec.expiry,
                    spec.venue_mode, spec.tick, q};
}

struct PositionView {
  std::string market_id;
  Side side = Side::YES;
  MilliShares qty = 0;
  Micro avg_entry = 0;
  Micro cost_basis = 0;
  Micro mark = 0; // bid-side liquidation value
  std::int64_t opened_at = 0;
};

struct PortfolioView {
  Micro cash = 0;
  Micro account_value = 0;
  Micro starting_capital = 0;
  Cpp return_pct_cpp = 0;
  std::vector<PositionView> positions;
};

struct LearningSummary {
  std::vector<Category> losing_categories;  // worst realized PnL first, up to 2
  std::vector<Category> winning_categories; // best realized PnL first, up to 2
  std::vector<std::string> expiring_positions; // held markets close to expiry
};

// Distill an agent's own history: the two worst- and two best-performing
// categories by realized PnL, plus held markets whose expiry is within the
// reminder horizon. expiries maps every *held* market to its expiry time.
inline LearningSummary summarize_learning(
    std::span<const ClosedTrade> closed,
    const std::map<std::string, Category>& categories,
    const std::map<std::string, std::int64_t>& held_expiries, std::int64_t now,
    std::int64_t reminder_horizon_secs) {
  LearningSummary ls;
  std::map<Category, Micro> pnl_by_cat;
  for (const ClosedTrade& t : closed) {
    auto cit = categories.find(t.market_id);
    if (cit != categories.end()) pnl_by_cat[cit->second] += t.realized_pnl;
  }
  std::vector<std::pair<Category, Micro>> flat(pnl_by_cat.begin(),
                                               pnl_by_cat.end());
  std::sort(flat.begin(), flat.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return static_cast<int>(a.first) < static_cast<int>(b.first);
  });
  for (const auto& [cat, pnl] : flat)
    if (pnl < 0 && ls.losing_categories.size() < 2)
      ls.losing_categories.push_back(cat);
  for (auto it = flat.rbegin(); it != flat.rend(); ++it)
    if (it->second > 0 && ls.winning_categories.size() < 2)
      ls.winning_categories.push_back(it->first);
  for (const auto& [market_id, expiry] : held_expiries)
    if (expiry - now <= reminder_horizon_secs)
      ls.expiring_positions.push_back(market_id);
  return ls;
}

struct CycleContext {
  std::int64_t cycle_index = 0;
  std::int64_t now = 0;
  std::int64_t cycle_interval_secs = 0;
  std::vector<MarketView> markets; // tradable (unexpired) markets only
  PortfolioView portfolio;
  std::vector<SettlementRecord> recent_settlements;
  std::vector<ClosedTrade> recent_nettings;
  LearningSummary learning;

  const MarketView* find_market(const std::string& id) const {
    for (const MarketView& m : markets)
      if (m.market_id == id) return &m;
    return nullptr;
  }
};

// --- actions ---

struct PlaceOrderAction {
  std::string market_id;
  Side side = Side::YES;
  MilliShares qty = 0;
  Micro max_price = kMicroPerDollar;
};

struct ResearchAction {
  std::string query;
};

struct NotePutAction {
  std::string key;
  std::string body;
  NoteKind kind = NoteKind::Note;
};

struct NoteSearchAction {
  std::string query;
};

struct NoteEditAction {
  std::string key;
  std::string body;
};

struct DiscoverAction {
  DiscoveryQuery query;
  QualityFilter quality;
};

struct NoOpAction {};

struct AgentAction {
  std::variant<PlaceOrderAction, ResearchAction, NotePutAction,
               NoteSearchAction, NoteEditAction, DiscoverAction, NoOpAction>
      act = NoOpAction{};
  std::string reasoning;
};

inline AgentAction place_order(std::string market_id, Side side,
                               MilliShares qty,
                               Micro max_price = kMicroPerDollar,
                               std::string reasoning = {}) {
  AgentAction a;
  a.act = PlaceOrderAction{std::move(market_id), side, qty, max_price};
  a.reasoning = std::move(reasoning);
  return a;
}

// The single agent interface. decide() must be a pure function of the
// context plus the agent's own construction-time parameters; the orchestrator
// treats a throwing agent as NoOp for the cycle.
class Agent {
public:
  virtual ~Agent() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<AgentAction> decide(const CycleContext& ctx) = 0;
};

// --- JSON (context serialization is also the hidden-field audit surface) ---

inline void to_json(json& j, const MarketView& m) {
  j = json{{"market_id", m.market_id},
           {"series_id", m.series_id},
           {"category", to_string(m.category)},
           {"title", m.title},
           {"settlement_rule", m.settlement_rule},
           {"expiry", m.expiry},
           {"venue_mode", to_string(m.venue_mode)},
           {"tick", m.tick},
           {"quote", m.quote}};
}

inline void to_json(json& j, const PositionView& p) {
  j = json{{"market_id", p.market_id},
           {"side", to_string(p.side)},
           {"qty", p.qty},
           {"avg_entry", p.avg_entry},
           {"cost_basis", p.cost_basis},
           {"mark", p.mark},
           {"opened_at", p.opened_at}};
}

inline void to_json(json& j, const PortfolioView& p) {
  j = json{{"cash", p.cash},
           {"account_value", p.account_value},
           {"starting_capital", p.starting_capital},
           {"return_pct_cpp", p.return_pct_cpp},
           {"positions", p.positions}};
}

inline void to_json(json& j, const LearningSummary& l) {
  json losing = json::array(), winning = json::array();
  for (Category c : l.losing_categories) losing.push_back(to_string(c));
  for (Category c : l.winning_categories) winning.push_back(to_string(c));
  j = json{{"losing_categories", losing},
           {"winning_categories", winning},
           {"expiring_positions", l.expiring_positions}};
}

inline void to_json(json& j, const CycleContext& c) {
  j = json{{"cycle_index", c.cycle_index},
           {"now", c.now},
           {"cycle_interval_secs", c.cycle_interval_secs},
           {"markets", c.markets},
           {"portfolio", c.portfolio},
           {"recent_settlements", c.recent_settlements},
           {"recent_nettings", c.recent_nettings},
           {"learning", c.learning}};
}

inline void to_json(json& j, const AgentAction& a) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PlaceOrderAction>) {
          j = json{{"type", "place_order"},
                   {"market_id", v.market_id},
                   {"side", to_string(v.side)},
                   {"qty", v.qty},
                   {"max_price", v.max_price}};
        } else if constexpr (std::is_same_v<T, ResearchAction>) {
          j = json{{"type", "research"}, {"query", v.query}};
        } else if constexpr (std::is_same_v<T, NotePutAction>) {
          j = json{{"type", "note_put"},
                   {"key", v.key},
                   {"body", v.body},
                   {"kind", to_string(v.kind)}};
        } else if constexpr (std::is_same_v<T, NoteSearchAction>) {
          j = json{{"type", "note_search"}, {"query", v.query}};
        } else if constexpr (std::is_same_v<T, NoteEditAction>) {
          j = json{{"type", "note_edit"}, {"key", v.key}, {"body", v.body}};
        } else if constexpr (std::is_same_v<T, DiscoverAction>) {
          j = json{{"type", "discover"},
                   {"query", v.query},
                   {"quality", v.quality}};
        } else {
          j = json{{"type", "noop"}};
        }
      },
      a.act);
  if (!a.reasoning.empty()) j["reasoning"] = a.reasoning;
}

} // namespace pmsim
