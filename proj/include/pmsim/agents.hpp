#pragma once

#include <memory>

#include "pmsim/agent.hpp"
#include "pmsim/fees.hpp"
#include "pmsim/rng.hpp"

namespace pmsim {

// Scripted reference agents. Each is deterministic given (seed, context):
// per-cycle randomness is derived from the cycle index, never from mutable
// state, so calling decide() twice on the same context yields the same list.

// Hidden ground truth handed only to agents that are defined by their access
// to it. Built by the orchestrator from the synthetic universe; the
// CycleContext never carries any of this.
struct PrivilegedFeed {
  std::map<std::string, Outcome> outcomes;
  std::map<std::string, Ppm> true_probs;
};

namespace detail {

// Largest affordable whole-share order within the concentration cap and cash
// (fee included). Returns 0 when nothing fits.
inline MilliShares fit_qty(const CycleContext& ctx, const MarketView& m,
                           Micro ask, MilliShares want_qty,
                           const FeeSchedule& fees, std::int64_t cap_num,
                           std::int64_t cap_den) {
  if (ask <= 0) return 0;
  MilliShares qty = want_qty;
  Micro existing = 0;
  for (const PositionView& p : ctx.portfolio.positions)
    if (p.market_id == m.market_id) existing += p.cost_basis;
  __int128 cap = static_cast<__int128>(cap_num) * ctx.portfolio.account_value;
  while (qty >= kSharesScale) {
    Micro cost = nano_to_micro_trunc(cost_nano(qty, ask)).micro;
    Micro fee = compute_fee(fees, ask, qty);
    bool cap_ok =
        static_cast<__int128>(existing + cost) * cap_den <= cap;
    if (cap_ok && cost + fee <= ctx.portfolio.cash) return qty;
    qty -= kSharesScale;
  }
  return 0;
}

inline bool holds_position(const CycleContext& ctx, const std::string& market_id) {
  for (const PositionView& p : ctx.portfolio.positions)
    if (p.market_id == market_id && p.qty > 0) return true;
  return false;
}

} // namespace detail

class NoOpAgent : public Agent {
public:
  explicit NoOpAgent(std::string id) : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  std::vector<AgentAction> decide(const CycleContext&) override { return {}; }

private:
  std::string id_;
};

// Reads the scheduled outcome of every market and bets the winning side,
// mispredicting each market independently with probability 1 - accuracy.
// Positions are held to settlement. Sizing respects the concentration cap
// proactively.
class OracleAgent : public Agent {
public:
  OracleAgent(std::string id, std::uint64_t seed, Ppm accuracy,
              MilliShares qty, PrivilegedFeed feed, FeeSchedule fees = {})
      : id_(std::move(id)), seed_(seed), accuracy_(accuracy), qty_(qty),
        feed_(std::move(feed)), fees_(fees) {}

  const std::string& id() const override { return id_; }

  std::vector<AgentAction> decide(const CycleContext& ctx) override {
    std::vector<AgentAction> actions;
    for (const MarketView& m : ctx.markets) {
      if (detail::holds_position(ctx, m.market_id)) continue;
      auto it = feed_.outcomes.find(m.market_id);
      if (it == feed_.outcomes.end() || it->second == Outcome::VOID) continue;
      // one prediction per market, stable across cycles
      Rng flip(mix_seed(mix_seed(seed_, 0xF11BULL), m.market_id));
      bool correct = flip.chance_ppm(accuracy_);
      Outcome predicted = it->second;
      if (!correct)
        predicted = predicted == Outcome::YES ? Outcome::NO : Outcome::YES;
      Side side = predicted == Outcome::YES ? Side::YES : Side::NO;
      Micro ask = m.quote.ask(side);
      if (ask <= 0 || ask >= kMicroPerDollar) continue;
      MilliShares qty = detail::fit_qty(ctx, m, ask, qty_, fees_, 15, 100);
      if (qty <= 0) continue;
      actions.push_back(place_order(m.market_id, side, qty));
    }
    return actions;
  }

private:
  std::string id_;
  std::uint64_t seed_;
  Ppm accuracy_;
  MilliShares qty_;
  PrivilegedFeed feed_;
  FeeSchedule fees_;
};

// Coin-flip trader: each cycle, each market trades with probability
// trade_prob on a uniformly random side. The baseline null agent.
class RandomAgent : public Agent {
public:
  RandomAgent(std::string id, std::uint64_t seed, Ppm trade_prob,
              MilliShares max_shares = 3, FeeSchedule fees = {},
              Ppm research_prob = 0)
      : id_(std::move(id)), seed_(seed), trade_prob_(trade_prob),
        max_shares_(max_shares), fees_(fees), research_prob_(research_prob) {}

  const std::string& id() const override { return id_; }

  std::vector<AgentAction> decide(const CycleContext& ctx) override {
    std::vector<AgentAction> actions;
    Rng rng(mix_seed(seed_, 0x52000000ULL + ctx.cycle_index));
    for (const MarketView& m : ctx.markets) {
      if (research_prob_ > 0 && rng.chance_ppm(research_prob_))
        actions.push_back({ResearchAction{m.title}, ""});
      if (!rng.chance_ppm(trade_prob_)) continue;
      Side side = rng.below(2) == 0 ? Side::YES : Side::NO;
      MilliShares want = (1 + rng.range(0, max_shares_ - 1)) * kSharesScale;
      Micro ask = m.quote.ask(side);
      if (ask <= 0 || ask >= kMicroPerDollar) continue;
      MilliShares qty = detail::fit_qty(ctx, m, ask, want, fees_, 15, 100);
      if (qty <= 0) continue;
      actions.push_back(place_order(m.market_id, side, qty));
    }
    return actions;
  }

private:
  std::string id_;
  std::uint64_t seed_;
  Ppm trade_prob_;
  MilliShares max_shares_;
  FeeSchedule fees_;
  Ppm research_prob_;
};

// Estimates each market's probability as true_prob plus a fixed seeded
// perturbation (uniform +/- sigma), then trades the side with positive
// expected value per share after prices and estimated fees. Abstains when no
// side clears the threshold.
class EVAgent : public Agent {
public:
  EVAgent(std::string id, std::uint64_t seed, Ppm sigma, Micro ev_threshold,
          MilliShares qty, PrivilegedFeed feed, FeeSchedule fees = {})
      : id_(std::move(id)), seed_(seed), sigma_(sigma),
        threshold_(ev_threshold), qty_(qty), feed_(std::move(feed)),
        fees_(fees) {}

  const std::string& id() const override { return id_; }

  // Expected fee per share before the venue's cent rounding; the venue's
  // actual charge is this rounded up per fill.
  Micro fee_estimate_per_share(Micro ask) const {
    if (fees_.kind == FeeKind::Zero) return 0;
    __int128 n = static_cast<__int128>(fees_.rate_num) * ask *
                 (kMicroPerDollar - ask);
    return static_cast<Micro>(n / (static_cast<__int128>(fees_.rate_den) *
                                   kMicroPerDollar));
  }

  Micro ev_per_share(Ppm estimate, Micro ask, Side side) const {
    Ppm p = side == Side::YES ? estimate : kPpmOne - estimate;
    return p - ask - fee_estimate_per_share(ask);
  }

  std::vector<AgentAction> decide(const CycleContext& ctx) override {
    std::vector<AgentAction> actions;
    for (const MarketView& m : ctx.markets) {
      if (detail::holds_position(ctx, m.market_id)) continue;
      auto it = feed_.true_probs.find(m.market_id);
      if (it == feed_.true_probs.end()) continue;
      Ppm est = it->second;
      if (sigma_ > 0) {
        Rng rng(mix_seed(mix_seed(seed_, 0xE571ULL), m.market_id));
        est = std::clamp<Ppm>(est + rng.range(-sigma_, sigma_), 0, kPpmOne);
      }
      Micro ev_yes = ev_per_share(est, m.quote.yes_ask, Side::YES);
      Micro ev_no = ev_per_share(est, m.quote.no_ask, Side::NO);
      Side side = ev_yes >= ev_no ? Side::YES : Side::NO;
      Micro ev = std::max(ev_yes, ev_no);
      if (ev <= threshold_) continue; // only positive expected value trades
      Micro ask = m.quote.ask(side);
      if (ask <= 0 || ask >= kMicroPerDollar) continue;
      MilliShares qty = detail::fit_qty(ctx, m, ask, qty_, fees_, 15, 100);
      if (qty <= 0) continue;
      actions.push_back(place_order(
          m.market_id, side, qty, kMicroPerDollar,
          "ev_per_share=" + std::to_string(ev) + " est_ppm=" + std::to_string(est)));
    }
    return actions;
  }

private:
  std::string id_;
  std::uint64_t seed_;
  Ppm sigma_;
  Micro threshold_;
  MilliShares qty_;
  PrivilegedFeed feed_;
  FeeSchedule fees_;
};

// Fundamental path: enters random positions and never exits; every close is
// a settlement.
class HoldToSettlementAgent : public Agent {
public:
  HoldToSettlementAgent(std::string id, std::uint64_t seed, Ppm trade_prob,
                        MilliShares shares = 1, FeeSchedule fees = {})
      : id_(std::move(id)), seed_(seed), trade_prob_(trade_prob),
        shares_(shares), fees_(fees) {}

  const std::string& id() const override { return id_; }

  std::vector<AgentAction> decide(const CycleContext& ctx) override {
    std::vector<AgentAction> actions;
    Rng rng(mix_seed(seed_, 0x48000000ULL + ctx.cycle_index));
    for (const MarketView& m : ctx.markets) {
      if (detail::holds_position(ctx, m.market_id)) continue;
      if (!rng.chance_ppm(trade_prob_)) continue;
      Side side = rng.below(2) == 0 ? Side::YES : Side::NO;
      Micro ask = m.quote.ask(side);
      if (ask <= 0 || ask >= kMicroPerDollar) continue;
      MilliShares qty =
          detail::fit_qty(ctx, m, ask, shares_ * kSharesScale, fees_, 15, 100);
      if (qty <= 0) continue;
      actions.push_back(place_order(m.market_id, side, qty));
    }
    return actions;
  }

private:
  std::string id_;
  std::uint64_t seed_;
  Ppm trade_prob_;
  MilliShares shares_;
  FeeSchedule fees_;
};

// Market-making path: enters like the fundamental agent but nets out every
// position after hold_cycles, so closes are nettings unless expiry arrives
// first.
class EarlyExitAgent : public Agent {
public:
  EarlyExitAgent(std::string id, std::uint64_t seed, Ppm trade_prob,
                 std::int64_t hold_cycles, MilliShares shares = 1,
                 FeeSchedule fees = {})
      : id_(std::move(id)), seed_(seed), trade_prob_(trade_prob),
        hold_cycles_(hold_cycles), shares_(shares), fees_(fees) {}

  const std::string& id() const override { return id_; }

  std::vector<AgentAction> decide(const CycleContext& ctx) override {
    std::vector<AgentAction> actions;
    // exits first: buying the opposite side nets the position out
    for (const PositionView& p : ctx.portfolio.positions) {
      if (p.qty <= 0 || !ctx.find_market(p.market_id)) continue;
      std::int64_t age = ctx.now - p.opened_at;
      if (age >= hold_cycles_ * ctx.cycle_interval_secs)
        actions.push_back(place_order(p.market_id, opposite(p.side), p.qty,
                                      kMicroPerDollar, "scheduled exit"));
    }
    Rng rng(mix_seed(seed_, 0x45000000ULL + ctx.cycle_index));
    for (const MarketView& m : ctx.markets) {
      if (detail::holds_position(ctx, m.market_id)) continue;
      if (!rng.chance_ppm(trade_prob_)) continue;
      Side side = rng.below(2) == 0 ? Side::YES : Side::NO;
      Micro ask = m.quote.ask(side);
      if (ask <= 0 || ask >= kMicroPerDollar) continue;
      MilliShares qty =
          detail::fit_qty(ctx, m, ask, shares_ * kSharesScale, fees_, 15, 100);
      if (qty <= 0) continue;
      actions.push_back(place_order(m.market_id, side, qty));
    }
    return actions;
  }

private:
  std::string id_;
  std::uint64_t seed_;
  Ppm trade_prob_;
  std::int64_t hold_cycles_;
  MilliShares shares_;
  FeeSchedule fees_;
};

// Config-driven construction. `params` carries kind-specific knobs; the
// privileged feed is only wired into the agents defined by it.
inline std::unique_ptr<Agent> make_agent(const std::string& kind,
                                         const std::string& agent_id,
                                         const json& params,
                                         std::uint64_t run_seed,
                                         const PrivilegedFeed& feed,
                                         const FeeSchedule& fees) {
  std::uint64_t seed = params.value("seed", run_seed);
  if (kind == "noop") return std::make_unique<NoOpAgent>(agent_id);
  if (kind == "oracle")
    return std::make_unique<OracleAgent>(
        agent_id, seed, params.value("accuracy_ppm", 1'000'000LL),
        params.value("qty_shares", 1LL) * kSharesScale, feed, fees);
  if (kind == "random")
    return std::make_unique<RandomAgent>(
        agent_id, seed, params.value("trade_prob_ppm", 250'000LL),
        params.value("max_shares", 3LL), fees,
        params.value("research_prob_ppm", 0LL));
  if (kind == "ev")
    return std::make_unique<EVAgent>(
        agent_id, seed, params.value("sigma_ppm", 50'000LL),
        params.value("ev_threshold", 0LL),
        params.value("qty_shares", 2LL) * kSharesScale, feed, fees);
  if (kind == "hold")
    return std::make_unique<HoldToSettlementAgent>(
        agent_id, seed, params.value("trade_prob_ppm", 150'000LL),
        params.value("qty_shares", 1LL), fees);
  if (kind == "early_exit")
    return std::make_unique<EarlyExitAgent>(
        agent_id, seed, params.value("trade_prob_ppm", 150'000LL),
        params.value("hold_cycles", 2LL), params.value("qty_shares", 1LL),
        fees);
  throw ValidationError("unknown agent kind: " + kind);
}

} // namespace pmsim
