#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pmsim/ledger.hpp"

namespace pmsim {

// Conservative mark-to-market and the reporting metric suite. Positions are
// always valued at the bid (what they could be liquidated for) — never mid,
// ask, or last. A market with no quote marks at zero.

inline Micro mark_position(const Position& p, const QuoteTop* quote) {
  if (p.qty <= 0 || quote == nullptr) return 0;
  return nano_to_micro_trunc(cost_nano(p.qty, quote->bid(p.side))).micro;
}

template <typename QuoteLookup> // QuoteLookup: market_id -> const QuoteTop*
  requires std::is_invocable_r_v<const QuoteTop*, QuoteLookup,
                                 const std::string&>
Micro account_value(const Account& a, QuoteLookup&& quote_for) {
  Micro value = a.cash;
  for (const auto& [market_id, pp] : a.positions) {
    const QuoteTop* q = quote_for(market_id);
    value += mark_position(pp.yes, q);
    value += mark_position(pp.no, q);
  }
  return value;
}

inline Micro account_value(const Account& a,
                           const std::map<std::string, QuoteTop>& quotes) {
  return account_value(a, [&](const std::string& id) -> const QuoteTop* {
    auto it = quotes.find(id);
    return it == quotes.end() ? nullptr : &it->second;
  });
}

// Total PnL over starting capital, in centi-percentage-points (0.01 %),
// round-half-even.
inline Cpp return_cpp(Micro total_pnl, Micro starting_capital) {
  if (starting_capital <= 0)
    throw ValidationError("return_cpp: starting capital must be positive");
  return ratio_cpp(total_pnl, starting_capital);
}

// Largest peak-to-trough decline over an ordered value series, as
// centi-percentage-points. The maximum ratio is selected exactly (cross
// multiplication) and rounded once at the end.
inline Cpp max_drawdown_cpp(std::span<const Micro> series) {
  if (series.empty()) throw ValidationError("max_drawdown: empty series");
  Micro peak = 0;
  Micro best_num = 0, best_den = 1;
  for (Micro v : series) {
    if (v > peak) peak = v;
    if (peak <= 0) continue;
    Micro drop = peak - v;
    if (static_cast<__int128>(drop) * best_den >
        static_cast<__int128>(best_num) * peak) {
      best_num = drop;
      best_den = peak;
    }
  }
  return ratio_cpp(best_num, best_den);
}

struct WinRate {
  std::optional<Cpp> rate_cpp; // absent below the small-sample threshold
  std::int64_t matched = 0;
  std::int64_t wins = 0;
};

inline constexpr std::int64_t kWinRateMinTrades = 5;

inline WinRate win_rate(std::span<const ClosedTrade> trades,
                        std::optional<ExitType> filter,
                        std::int64_t min_trades = kWinRateMinTrades) {
  WinRate w;
  for (const ClosedTrade& t : trades) {
    if (filter && t.exit_type != *filter) continue;
    ++w.matched;
    if (t.realized_pnl > 0) ++w.wins;
  }
  if (w.matched >= min_trades) w.rate_cpp = ratio_cpp(w.wins, w.matched);
  return w;
}

struct ExitPatternStats {
  std::int64_t settlements = 0;
  std::int64_t nettings = 0;
  // Rates are complementary by construction so they always sum to 100%.
  std::optional<Cpp> settlement_rate_cpp;
  std::optional<Cpp> early_exit_rate_cpp;
  std::optional<Micro> avg_pnl_settlement;
  std::optional<Micro> avg_pnl_netting;
};

inline ExitPatternStats exit_pattern_stats(std::span<const ClosedTrade> trades) {
  ExitPatternStats s;
  Micro pnl_settle = 0, pnl_net = 0;
  for (const ClosedTrade& t : trades) {
    if (t.exit_type == ExitType::Settlement) {
      ++s.settlements;
      pnl_settle += t.realized_pnl;
    } else {
      ++s.nettings;
      pnl_net += t.realized_pnl;
    }
  }
  std::int64_t total = s.settlements + s.nettings;
  if (total > 0) {
    s.settlement_rate_cpp = ratio_cpp(s.settlements, total);
    s.early_exit_rate_cpp = 10'000 - *s.settlement_rate_cpp;
  }
  if (s.settlements > 0) s.avg_pnl_settlement = rhe_div(pnl_settle, s.settlements);
  if (s.nettings > 0) s.avg_pnl_netting = rhe_div(pnl_net, s.nettings);
  return s;
}

struct CategoryRow {
  Category category = Category::Financial;
  std::int64_t settled = 0;
  WinRate settlement_win; // over settlement exits only
  Micro total_pnl = 0;    // realized over all exits in the category
};

// Per-category settlement performance. Throws on a trade whose market is not
// in the lookup.
template <typename CategoryLookup> // market_id -> std::optional<Category>
  requires std::is_invocable_r_v<std::optional<Category>, CategoryLookup,
                                 const std::string&>
std::vector<CategoryRow> category_stats(std::span<const ClosedTrade> trades,
                                        CategoryLookup&& category_for,
                                        std::int64_t min_trades = kWinRateMinTrades) {
  std::map<Category, std::vector<ClosedTrade>> by_cat;
  for (const ClosedTrade& t : trades) {
    std::optional<Category> c = category_for(t.market_id);
    if (!c) throw ValidationError("category_stats: unknown market " + t.market_id);
    by_cat[*c].push_back(t);
  }
  std::vector<CategoryRow> rows;
  rows.reserve(by_cat.size());
  for (auto& [cat, ts] : by_cat) {
    CategoryRow row;
    row.category = cat;
    row.settlement_win = win_rate(ts, ExitType::Settlement, min_trades);
    row.settled = row.settlement_win.matched;
    for (const ClosedTrade& t : ts) row.total_pnl += t.realized_pnl;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<CategoryRow> category_stats(
    std::span<const ClosedTrade> trades,
    const std::map<std::string, Category>& categories,
    std::int64_t min_trades = kWinRateMinTrades) {
  return category_stats(
      trades,
      [&](const std::string& id) -> std::optional<Category> {
        auto it = categories.find(id);
        if (it == categories.end()) return std::nullopt;
        return it->second;
      },
      min_trades);
}

struct CycleSnapshot {
  std::string agent_id;
  std::int64_t cycle_index = 0;
  std::int64_t as_of = 0;
  Micro account_value = 0;
  Micro cash = 0;
  Micro unrealized_pnl = 0; // account_value - starting_capital - realized
  Micro realized_pnl_total = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t reasoning_tokens = 0;
  std::int64_t cycle_duration_ms = 0; // virtual runs record 0
  std::int64_t trades_this_cycle = 0;
  std::int64_t stale_marks = 0; // positions marked off a pre-cycle quote
};

inline void to_json(json& j, const CycleSnapshot& s) {
  j = json{{"agent_id", s.agent_id},
           {"cycle_index", s.cycle_index},
           {"as_of", s.as_of},
           {"account_value", s.account_value},
           {"cash", s.cash},
           {"unrealized_pnl", s.unrealized_pnl},
           {"realized_pnl_total", s.realized_pnl_total},
           {"prompt_tokens", s.prompt_tokens},
           {"completion_tokens", s.completion_tokens},
           {"reasoning_tokens", s.reasoning_tokens},
           {"cycle_duration_ms", s.cycle_duration_ms},
           {"trades_this_cycle", s.trades_this_cycle},
           {"stale_marks", s.stale_marks}};
}

inline void from_json(const json& j, CycleSnapshot& s) {
  j.at("agent_id").get_to(s.agent_id);
  j.at("cycle_index").get_to(s.cycle_index);
  j.at("as_of").get_to(s.as_of);
  j.at("account_value").get_to(s.account_value);
  j.at("cash").get_to(s.cash);
  j.at("unrealized_pnl").get_to(s.unrealized_pnl);
  j.at("realized_pnl_total").get_to(s.realized_pnl_total);
  j.at("prompt_tokens").get_to(s.prompt_tokens);
  j.at("completion_tokens").get_to(s.completion_tokens);
  j.at("reasoning_tokens").get_to(s.reasoning_tokens);
  j.at("cycle_duration_ms").get_to(s.cycle_duration_ms);
  j.at("trades_this_cycle").get_to(s.trades_this_cycle);
  s.stale_marks = j.value("stale_marks", 0);
}

struct MetricsReport {
  std::string agent_id;
  Micro final_value = 0;
  Micro total_pnl = 0;
  Cpp return_pct_cpp = 0;
  WinRate win_all;        // both exit types
  WinRate win_settlement; // resolved positions only
  WinRate win_early_exit; // netting exits only
  Cpp max_drawdown_cpp = 0;
  ExitPatternStats exit_pattern;
  std::vector<CategoryRow> per_category;
};

inline MetricsReport build_metrics(const std::string& agent_id,
                                   std::span<const Micro> value_series,
                                   Micro starting_capital,
                                   std::span<const ClosedTrade> trades,
                                   const std::map<std::string, Category>& categories) {
  MetricsReport r;
  r.agent_id = agent_id;
  r.final_value = value_series.empty() ? starting_capital : value_series.back();
  r.total_pnl = r.final_value - starting_capital;
  r.return_pct_cpp = return_cpp(r.total_pnl, starting_capital);
  r.win_all = win_rate(trades, std::nullopt);
  r.win_settlement = win_rate(trades, ExitType::Settlement);
  r.win_early_exit = win_rate(trades, ExitType::Netting);
  if (value_series.empty()) {
    std::vector<Micro> flat{starting_capital};
    r.max_drawdown_cpp = max_drawdown_cpp(flat);
  } else {
    r.max_drawdown_cpp = max_drawdown_cpp(value_series);
  }
  r.exit_pattern = exit_pattern_stats(trades);
  r.per_category = category_stats(trades, categories);
  return r;
}

inline void to_json(json& j, const WinRate& w) {
  j = json{{"matched", w.matched}, {"wins", w.wins}};
  if (w.rate_cpp) j["rate_cpp"] = *w.rate_cpp;
}

inline void from_json(const json& j, WinRate& w) {
  j.at("matched").get_to(w.matched);
  j.at("wins").get_to(w.wins);
  if (j.contains("rate_cpp"))
    w.rate_cpp = j.at("rate_cpp").get<Cpp>();
  else
    w.rate_cpp.reset();
}

inline void to_json(json& j, const ExitPatternStats& s) {
  j = json{{"settlements", s.settlements}, {"nettings", s.nettings}};
  if (s.settlement_rate_cpp) j["settlement_rate_cpp"] = *s.settlement_rate_cpp;
  if (s.early_exit_rate_cpp) j["early_exit_rate_cpp"] = *s.early_exit_rate_cpp;
  if (s.avg_pnl_settlement) j["avg_pnl_settlement"] = *s.avg_pnl_settlement;
  if (s.avg_pnl_netting) j["avg_pnl_netting"] = *s.avg_pnl_netting;
}

inline void from_json(const json& j, ExitPatternStats& s) {
  j.at("settlements").get_to(s.settlements);
  j.at("nettings").get_to(s.nettings);
  s.settlement_rate_cpp.reset();
  s.early_exit_rate_cpp.reset();
  s.avg_pnl_settlement.reset();
  s.avg_pnl_netting.reset();
  if (j.contains("settlement_rate_cpp")) s.settlement_rate_cpp = j.at("settlement_rate_cpp").get<Cpp>();
  if (j.contains("early_exit_rate_cpp")) s.early_exit_rate_cpp = j.at("early_exit_rate_cpp").get<Cpp>();
  if (j.contains("avg_pnl_settlement")) s.avg_pnl_settlement = j.at("avg_pnl_settlement").get<Micro>();
  if (j.contains("avg_pnl_netting")) s.avg_pnl_netting = j.at("avg_pnl_netting").get<Micro>();
}

inline void to_json(json& j, const CategoryRow& r) {
  j = json{{"category", to_string(r.category)},
           {"settled", r.settled},
           {"settlement_win", r.settlement_win},
           {"total_pnl", r.total_pnl}};
}

inline void from_json(const json& j, CategoryRow& r) {
  r.category = category_from_string(j.at("category").get<std::string>());
  j.at("settled").get_to(r.settled);
  j.at("settlement_win").get_to(r.settlement_win);
  j.at("total_pnl").get_to(r.total_pnl);
}

inline void to_json(json& j, const MetricsReport& r) {
  j = json{{"agent_id", r.agent_id},
           {"final_value", r.final_value},
           {"total_pnl", r.total_pnl},
           {"return_pct_cpp", r.return_pct_cpp},
           {"win_all", r.win_all},
           {"win_settlement", r.win_settlement},
           {"win_early_exit", r.win_early_exit},
           {"max_drawdown_cpp", r.max_drawdown_cpp},
           {"exit_pattern", r.exit_pattern},
           {"per_category", r.per_category}};
}

inline void from_json(const json& j, MetricsReport& r) {
  j.at("agent_id").get_to(r.agent_id);
  j.at("final_value").get_to(r.final_value);
  j.at("total_pnl").get_to(r.total_pnl);
  j.at("return_pct_cpp").get_to(r.return_pct_cpp);
  j.at("win_all").get_to(r.win_all);
  j.at("win_settlement").get_to(r.win_settlement);
  j.at("win_early_exit").get_to(r.win_early_exit);
  j.at("max_drawdown_cpp").get_to(r.max_drawdown_cpp);
  j.at("exit_pattern").get_to(r.exit_pattern);
  j.at("per_category").get_to(r.per_category);
}

} // namespace pmsim
