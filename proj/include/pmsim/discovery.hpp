#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmsim/universe.hpp"

namespace pmsim {

// Market discovery over the current universe and a per-market quote history.
// Deterministic: stable predicates, stable sort keys, ties broken by
// market_id ascending.

enum class QueryKind {
  Keyword,
  Tag,
  VolumeTop,
  VolatilityTop,
  Trending,
  ExpiringWithin,
};

inline const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Keyword: return "Keyword";
    case QueryKind::Tag: return "Tag";
    case QueryKind::VolumeTop: return "VolumeTop";
    case QueryKind::VolatilityTop: return "VolatilityTop";
    case QueryKind::Trending: return "Trending";
    case QueryKind::ExpiringWithin: return "ExpiringWithin";
  }
  return "?";
}

inline QueryKind query_kind_from_string(const std::string& s) {
  for (QueryKind k : {QueryKind::Keyword, QueryKind::Tag, QueryKind::VolumeTop,
                      QueryKind::VolatilityTop, QueryKind::Trending,
                      QueryKind::ExpiringWithin})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown query kind: " + s);
}

// Trending and VolatilityTop share the same price-move metric; they differ
// only in intended default window (the underlying feeds never distinguish
// them further).
inline constexpr std::int64_t kDefaultVolatilityWindowSecs = 7 * 86'400;

struct DiscoveryQuery {
  QueryKind kind = QueryKind::VolumeTop;
  std::string keyword;               // Keyword only
  std::optional<Category> tag;       // Tag only
  std::int64_t window_secs = 0;      // Trending / ExpiringWithin (required),
                                     // VolatilityTop (defaulted)
  std::int64_t limit = 10;
};

struct QualityFilter {
  MilliShares min_liquidity = 0; // displayed top-of-book size, both sides summed
  MilliShares min_volume = 0;
  Micro min_price_move = 0;      // |mid change| over the query window
};

inline void to_json(json& j, const DiscoveryQuery& q) {
  j = json{{"kind", to_string(q.kind)},
           {"window_secs", q.window_secs},
           {"limit", q.limit}};
  if (!q.keyword.empty()) j["keyword"] = q.keyword;
  if (q.tag) j["tag"] = to_string(*q.tag);
}

inline void from_json(const json& j, DiscoveryQuery& q) {
  q.kind = query_kind_from_string(j.at("kind").get<std::string>());
  q.keyword = j.value("keyword", "");
  if (j.contains("tag")) q.tag = category_from_string(j.at("tag").get<std::string>());
  q.window_secs = j.value("window_secs", 0LL);
  q.limit = j.value("limit", 10LL);
}

inline void to_json(json& j, const QualityFilter& f) {
  j = json{{"min_liquidity", f.min_liquidity},
           {"min_volume", f.min_volume},
           {"min_price_move", f.min_price_move}};
}

inline void from_json(const json& j, QualityFilter& f) {
  f.min_liquidity = j.value("min_liquidity", 0LL);
  f.min_volume = j.value("min_volume", 0LL);
  f.min_price_move = j.value("min_price_move", 0LL);
}

// Time-ordered quote snapshots per market, appended every cycle.
using QuoteHistory = std::map<std::string, std::vector<QuoteTop>>;

namespace detail {

inline Micro quote_mid(const QuoteTop& q) { return (q.yes_bid + q.yes_ask) / 2; }

inline std::vector<std::string> tokenize_lower(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Number of distinct query tokens appearing whole in the title.
inline std::int64_t keyword_score(const std::string& keyword,
                                  const std::string& title) {
  std::vector<std::string> want = tokenize_lower(keyword);
  std::sort(want.begin(), want.end());
  want.erase(std::unique(want.begin(), want.end()), want.end());
  std::vector<std::string> have = tokenize_lower(title);
  std::sort(have.begin(), have.end());
  std::int64_t score = 0;
  for (const std::string& w : want)
    if (std::binary_search(have.begin(), have.end(), w)) ++score;
  return score;
}

// Absolute mid move between the earliest snapshot inside [now - window, now]
// and the latest snapshot. window <= 0 means the entire history.
inline Micro price_move(const std::vector<QuoteTop>& hist,
                        std::int64_t window_secs, std::int64_t now) {
  if (hist.size() < 2) return 0;
  const QuoteTop* first = nullptr;
  for (const QuoteTop& q : hist) {
    if (window_secs > 0 && q.as_of < now - window_secs) continue;
    first = &q;
    break;
  }
  if (!first || first == &hist.back()) return 0;
  Micro d = quote_mid(hist.back()) - quote_mid(*first);
  return d < 0 ? -d : d;
}

} // namespace detail

// Returns up to `limit` market ids, every one satisfying all quality
// thresholds, ranked per the query kind. Expired markets never match.
inline std::vector<std::string> discover(const Universe& u,
                                         const QuoteHistory& history,
                                         const DiscoveryQuery& query,
                                         const QualityFilter& quality,
                                         std::int64_t now) {
  if (query.limit < 1) throw ValidationError("discover: limit must be >= 1");
  switch (query.kind) {
    case QueryKind::Keyword:
      if (query.keyword.empty())
        throw ValidationError("discover: Keyword query requires a keyword");
      break;
    case QueryKind::Tag:
      if (!query.tag) throw ValidationError("discover: Tag query requires a tag");
      break;
    case QueryKind::Trending:
    case QueryKind::ExpiringWithin:
      if (query.window_secs <= 0)
        throw ValidationError("discover: query requires a positive window");
      break;
    default:
      break;
  }
  std::int64_t move_window = query.window_secs;
  if (query.kind == QueryKind::VolatilityTop && move_window <= 0)
    move_window = kDefaultVolatilityWindowSecs;
  bool windowed_move =
      query.kind == QueryKind::Trending || query.kind == QueryKind::VolatilityTop;

  struct Ranked {
    std::string id;
    std::int64_t primary;  // kind-specific, larger first (negated for asc keys)
    std::int64_t secondary;
  };
  std::vector<Ranked> ranked;

  for (const SyntheticMarket& m : u.markets) {
    const std::string& id = m.spec.market_id;
    if (now >= m.spec.expiry) continue;
    auto hit = history.find(id);
    if (hit == history.end() || hit->second.empty()) continue;
    const QuoteTop& latest = hit->second.back();

    if (latest.yes_bid_size + latest.yes_ask_size < quality.min_liquidity) continue;
    if (latest.volume < quality.min_volume) continue;
    Micro move = detail::price_move(hit->second,
                                    windowed_move ? move_window : 0, now);
    if (move < quality.min_price_move) continue;

    Ranked r{id, 0, 0};
    switch (query.kind) {
      case QueryKind::Keyword: {
        std::int64_t score = detail::keyword_score(query.keyword, m.spec.title);
        if (score <= 0) continue;
        r.primary = score;
        r.secondary = latest.volume;
        break;
      }
      case QueryKind::Tag:
        if (m.spec.category != *query.tag) continue;
        r.primary = latest.volume;
        break;
      case QueryKind::VolumeTop:
        r.primary = latest.volume;
        break;
      case QueryKind::VolatilityTop:
      case QueryKind::Trending:
        r.primary = move;
        break;
      case QueryKind::ExpiringWithin:
        if (m.spec.expiry > now + query.window_secs) continue;
        r.primary = -m.spec.expiry; // soonest first
        break;
    }
    ranked.push_back(std::move(r));
  }

  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.primary != b.primary) return a.primary > b.primary;
    if (a.secondary != b.secondary) return a.secondary > b.secondary;
    return a.id < b.id;
  });
  if (static_cast<std::int64_t>(ranked.size()) > query.limit)
    ranked.resize(query.limit);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (Ranked& r : ranked) out.push_back(std::move(r.id));
  return out;
}

} // namespace pmsim
