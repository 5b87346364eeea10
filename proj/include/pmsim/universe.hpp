#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pmsim/market.hpp"
#include "pmsim/rng.hpp"

namespace pmsim {

// Synthetic market universe: seeded generation of specs, scheduled
// settlements, and a clamped mean-reverting quote walk toward each market's
// hidden true probability. Everything is a pure function of the seed.

struct UniverseParams {
  int n_markets = 20;
  int horizon_cycles = 100;      // expiries land on cycles 1..horizon
  std::int64_t t0 = 1'767'225'600; // 2026-01-01T00:00:00Z
  std::int64_t interval_secs = 1800;
  Micro tick = 10'000;           // 1 cent
  Micro half_spread = 10'000;
  Micro noise = 20'000;          // per-step uniform mid perturbation, +/-
  std::int64_t reversion_num = 1;
  std::int64_t reversion_den = 8;
  Ppm prob_min = 20'000;
  Ppm prob_max = 980'000;
  Ppm void_prob = 0;
  MilliShares base_depth = 50'000;
  MilliShares volume_step_max = 20'000;
  ShareRule share_rule = ShareRule::WholeShare;
};

inline void to_json(json& j, const UniverseParams& p) {
  j = json{{"n_markets", p.n_markets},
           {"horizon_cycles", p.horizon_cycles},
           {"t0", p.t0},
           {"interval_secs", p.interval_secs},
           {"tick", p.tick},
           {"half_spread", p.half_spread},
           {"noise", p.noise},
           {"reversion_num", p.reversion_num},
           {"reversion_den", p.reversion_den},
           {"prob_min", p.prob_min},
           {"prob_max", p.prob_max},
           {"void_prob", p.void_prob},
           {"base_depth", p.base_depth},
           {"volume_step_max", p.volume_step_max},
           {"share_rule", to_string(p.share_rule)}};
}

inline void from_json(const json& j, UniverseParams& p) {
  UniverseParams d;
  p.n_markets = j.value("n_markets", d.n_markets);
  p.horizon_cycles = j.value("horizon_cycles", d.horizon_cycles);
  p.t0 = j.value("t0", d.t0);
  p.interval_secs = j.value("interval_secs", d.interval_secs);
  p.tick = j.value("tick", d.tick);
  p.half_spread = j.value("half_spread", d.half_spread);
  p.noise = j.value("noise", d.noise);
  p.reversion_num = j.value("reversion_num", d.reversion_num);
  p.reversion_den = j.value("reversion_den", d.reversion_den);
  p.prob_min = j.value("prob_min", d.prob_min);
  p.prob_max = j.value("prob_max", d.prob_max);
  p.void_prob = j.value("void_prob", d.void_prob);
  p.base_depth = j.value("base_depth", d.base_depth);
  p.volume_step_max = j.value("volume_step_max", d.volume_step_max);
  if (j.contains("share_rule"))
    p.share_rule = share_rule_from_string(j.at("share_rule").get<std::string>());
}

struct SyntheticMarket {
  MarketSpec spec;
  SettlementOutcome scheduled;
};

struct Universe {
  std::uint64_t seed = 0;
  UniverseParams params;
  std::vector<SyntheticMarket> markets;     // sorted by market_id
  std::map<std::string, QuoteTop> quotes;   // current top-of-book
  std::map<std::string, Micro> mid;         // walk state, sub-spread precision

  const SyntheticMarket* find(const std::string& market_id) const {
    auto it = std::lower_bound(
        markets.begin(), markets.end(), market_id,
        [](const SyntheticMarket& m, const std::string& id) {
          return m.spec.market_id < id;
        });
    if (it == markets.end() || it->spec.market_id != market_id) return nullptr;
    return &*it;
  }
};

namespace detail {

inline Micro clamp_price(Micro p, Micro tick) {
  return std::clamp<Micro>(p, tick, kMicroPerDollar - tick);
}

inline MilliShares draw_depth(Rng& rng, const UniverseParams& p,
                              MilliShares volume) {
  if (p.base_depth <= 0) return 0;
  std::int64_t jitter = static_cast<std::int64_t>(rng.below(2001)); // ~U[0,2] per mille
  return jitter * (p.base_depth + volume / 1000) / 1000;
}

inline QuoteTop quote_from_mid(const MarketSpec& spec, Micro mid,
                               const UniverseParams& p, MilliShares volume,
                               MilliShares bid_size, MilliShares ask_size,
                               std::optional<Micro> last,
                               std::int64_t as_of) {
  Micro bid_raw = mid - p.half_spread;
  Micro ask_raw = mid + p.half_spread;
  Micro bid = (bid_raw >= 0 ? bid_raw / spec.tick * spec.tick : 0);
  Micro ask = (ask_raw + spec.tick - 1) / spec.tick * spec.tick;
  bid = clamp_price(bid, spec.tick);
  ask = clamp_price(ask, spec.tick);
  if (bid > ask) bid = ask;
  QuoteTop q;
  q.market_id = spec.market_id;
  q.yes_bid = bid;
  q.yes_ask = ask;
  q.yes_bid_size = bid_size;
  q.yes_ask_size = ask_size;
  q.last_price = last;
  q.volume = volume;
  q.as_of = as_of;
  q = derive_complement(q);
  validate(q);
  return q;
}

} // namespace detail

inline Universe make_universe(std::uint64_t seed, const UniverseParams& params) {
  if (params.n_markets < 1) throw ValidationError("n_markets must be >= 1");
  if (params.horizon_cycles < 1) throw ValidationError("horizon must be >= 1");
  if (params.prob_min < 0 || params.prob_max > kPpmOne ||
      params.prob_min > params.prob_max)
    throw ValidationError("bad probability band");

  Universe u;
  u.seed = seed;
  u.params = params;
  u.markets.reserve(params.n_markets);
  for (int i = 0; i < params.n_markets; ++i) {
    Rng rng(mix_seed(seed, 0x11000000ULL + static_cast<std::uint64_t>(i)));
    const SeriesSeed& series = kSeriesSeeds[rng.below(kSeriesSeeds.size())];

    char idx[12];
    std::snprintf(idx, sizeof(idx), "%04d", i);
    SyntheticMarket m;
    m.spec.market_id = std::string(series.ticker) + "-" + idx;
    m.spec.series_id = series.ticker;
    m.spec.category = series.category;
    m.spec.title = std::string(series.title) + " #" + idx;
    m.spec.settlement_rule =
        "Settles YES if the underlying event occurs by expiry, otherwise NO.";
    m.spec.listed_at = params.t0;
    std::int64_t expiry_cycle = rng.range(1, params.horizon_cycles);
    m.spec.expiry = params.t0 + expiry_cycle * params.interval_secs;
    m.spec.venue_mode = params.share_rule;
    m.spec.tick = params.tick;
    m.spec.true_prob =
        params.prob_min + rng.range(0, params.prob_max - params.prob_min);
    validate(m.spec);

    m.scheduled.market_id = m.spec.market_id;
    m.scheduled.settled_at = m.spec.expiry;
    if (params.void_prob > 0 && rng.chance_ppm(params.void_prob))
      m.scheduled.outcome = Outcome::VOID;
    else
      m.scheduled.outcome =
          rng.chance_ppm(m.spec.true_prob) ? Outcome::YES : Outcome::NO;

    Micro mid = detail::clamp_price(
        m.spec.true_prob + rng.range(-params.noise, params.noise), params.tick);
    MilliShares bid_size = detail::draw_depth(rng, params, 0);
    MilliShares ask_size = detail::draw_depth(rng, params, 0);
    u.mid[m.spec.market_id] = mid;
    u.quotes[m.spec.market_id] = detail::quote_from_mid(
        m.spec, mid, params, 0, bid_size, ask_size, std::nullopt, params.t0);
    u.markets.push_back(std::move(m));
  }
  std::sort(u.markets.begin(), u.markets.end(),
            [](const SyntheticMarket& a, const SyntheticMarket& b) {
              return a.spec.market_id < b.spec.market_id;
            });
  return u;
}

// Advance every live market one cycle: mean-revert the mid toward true_prob,
// add seeded noise, clamp to [tick, $1 - tick]. Quotes freeze at expiry.
// Returns the quotes that changed, in market_id order.
inline std::vector<QuoteTop> step_quotes(Universe& u, int cycle_index,
                                         std::int64_t now) {
  std::vector<QuoteTop> updated;
  updated.reserve(u.markets.size());
  for (const SyntheticMarket& m : u.markets) {
    if (now >= m.spec.expiry) continue; // frozen
    Rng rng(mix_seed(mix_seed(u.seed, m.spec.market_id),
                     0x22000000ULL + static_cast<std::uint64_t>(cycle_index)));
    Micro mid = u.mid.at(m.spec.market_id);
    Micro pull = (m.spec.true_prob - mid) * u.params.reversion_num /
                 u.params.reversion_den;
    Micro eps =
        u.params.noise > 0 ? rng.range(-u.params.noise, u.params.noise) : 0;
    mid = detail::clamp_price(mid + pull + eps, u.params.tick);
    u.mid[m.spec.market_id] = mid;

    QuoteTop& prev = u.quotes.at(m.spec.market_id);
    MilliShares volume = prev.volume + rng.range(0, u.params.volume_step_max);
    MilliShares bid_size = detail::draw_depth(rng, u.params, volume);
    MilliShares ask_size = detail::draw_depth(rng, u.params, volume);
    prev = detail::quote_from_mid(m.spec, mid, u.params, volume, bid_size,
                                  ask_size, mid, now);
    updated.push_back(prev);
  }
  return updated;
}

// --- fixture serialization (line-delimited records, one market per line) ---

inline constexpr int kUniverseFormatVersion = 1;

inline std::string serialize_universe(const Universe& u) {
  std::string out;
  json header{{"format", "pmsim-universe"},
              {"version", kUniverseFormatVersion},
              {"seed", u.seed},
              {"params", u.params}};
  out += header.dump();
  out += '\n';
  for (const SyntheticMarket& m : u.markets) {
    json rec{{"spec", m.spec},
             {"outcome", m.scheduled},
             {"quote", u.quotes.at(m.spec.market_id)},
             {"mid", u.mid.at(m.spec.market_id)}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

inline Universe parse_universe(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("universe file: empty");
  json header = json::parse(line);
  if (header.value("format", "") != "pmsim-universe")
    throw ValidationError("universe file: bad header");
  if (header.value("version", -1) != kUniverseFormatVersion)
    throw ValidationError("universe file: unsupported version");
  Universe u;
  u.seed = header.value("seed", 0ULL);
  u.params = header.value("params", UniverseParams{});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    SyntheticMarket m;
    rec.at("spec").get_to(m.spec);
    rec.at("outcome").get_to(m.scheduled);
    QuoteTop q = rec.at("quote").get<QuoteTop>();
    u.mid[m.spec.market_id] = rec.at("mid").get<Micro>();
    u.quotes[m.spec.market_id] = q;
    u.markets.push_back(std::move(m));
  }
  std::sort(u.markets.begin(), u.markets.end(),
            [](const SyntheticMarket& a, const SyntheticMarket& b) {
              return a.spec.market_id < b.spec.market_id;
            });
  return u;
}

inline void save_universe(const Universe& u, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open for write: " + path);
  f << serialize_universe(u);
}

inline Universe load_universe(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open universe file: " + path);
  return parse_universe(f);
}

} // namespace pmsim
