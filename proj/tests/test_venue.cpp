#include <catch2/catch_amalgamated.hpp>

#include "pmsim/rng.hpp"
#include "pmsim/venue.hpp"

using namespace pmsim;

namespace {

MarketSpec mk_spec(std::int64_t expiry = 1'000'000) {
  MarketSpec m;
  m.market_id = "M";
  m.expiry = expiry;
  return m;
}

QuoteTop mk_quote(Micro yes_bid, Micro yes_ask, MilliShares bid_size,
                  MilliShares ask_size) {
  QuoteTop q;
  q.market_id = "M";
  q.yes_bid = yes_bid;
  q.yes_ask = yes_ask;
  q.yes_bid_size = bid_size;
  q.yes_ask_size = ask_size;
  return derive_complement(q);
}

Order mk_order(Side side, MilliShares qty, Micro max_price = kMicroPerDollar) {
  return Order{"o1", "M", side, qty, max_price};
}

} // namespace

TEST_CASE("fee schedule", "[venue]") {
  SECTION("zero schedule charges nothing") {
    CHECK(compute_fee(FeeSchedule{FeeKind::Zero}, 500'000, 123'456) == 0);
  }
  SECTION("quadratic taker rounds up to the next cent") {
    FeeSchedule s{FeeKind::QuadraticTaker, 7, 100};
    // 0.07 * 0.5 * 0.5 * 1 share = $0.0175 -> $0.02
    CHECK(compute_fee(s, 500'000, 1'000) == 20'000);
  }
  SECTION("quadratic vanishes at the price endpoints") {
    FeeSchedule s{FeeKind::QuadraticTaker, 7, 100};
    CHECK(compute_fee(s, 0, 10'000) == 0);
    CHECK(compute_fee(s, 1'000'000, 10'000) == 0);
  }
  SECTION("monotonically nondecreasing in quantity") {
    FeeSchedule s{FeeKind::QuadraticTaker, 7, 100};
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
      Micro price = rng.range(0, kMicroPerDollar);
      MilliShares q1 = 1 + rng.range(0, 100'000);
      MilliShares q2 = q1 + rng.range(0, 100'000);
      REQUIRE(compute_fee(s, price, q1) <= compute_fee(s, price, q2));
    }
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(compute_fee(FeeSchedule{}, -1, 10), ValidationError);
    CHECK_THROWS_AS(compute_fee(FeeSchedule{}, 10, 0), ValidationError);
  }
}

TEST_CASE("paper mode fills unconditionally", "[venue]") {
  SimVenue venue{VenueConfig{ExecMode::Paper, {}, ShareRule::WholeShare}};
  QuoteTop q = mk_quote(480'000, 500'000, 1'000, 1'000);
  ExecutionReport r =
      venue.execute_market_order(mk_order(Side::YES, 50'000), mk_spec(), q, 10);
  CHECK(r.status == ExecStatus::Filled);
  CHECK(r.filled_qty == 50'000);
  CHECK(r.fill_price == 500'000);
  CHECK(r.fee == 0);
}

TEST_CASE("paper fills never depend on displayed size", "[venue]") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    SimVenue venue{VenueConfig{ExecMode::Paper, {}, ShareRule::WholeShare}};
    QuoteTop q = mk_quote(480'000, 500'000, rng.range(0, 100'000),
                          rng.range(0, 100'000));
    venue.refresh_depth(q);
    ExecutionReport r = venue.execute_market_order(mk_order(Side::NO, 77'000),
                                                   mk_spec(), q, 10);
    REQUIRE(r.status == ExecStatus::Filled);
    REQUIRE(r.filled_qty == 77'000);
    REQUIRE(r.fill_price == q.no_ask);
  }
}

TEST_CASE("live fidelity respects displayed size", "[venue]") {
  SimVenue venue{VenueConfig{ExecMode::LiveFidelity, {}, ShareRule::WholeShare}};
  QuoteTop q = mk_quote(480'000, 500'000, 30'000, 20'000);
  venue.refresh_depth(q);

  SECTION("partial fill at the displayed quantity") {
    ExecutionReport r = venue.execute_market_order(mk_order(Side::YES, 50'000),
                                                   mk_spec(), q, 10);
    CHECK(r.status == ExecStatus::PartialFill);
    CHECK(r.filled_qty == 20'000);
  }
  SECTION("empty book rejects") {
    QuoteTop empty = mk_quote(480'000, 500'000, 10'000, 0);
    venue.refresh_depth(empty);
    ExecutionReport r = venue.execute_market_order(mk_order(Side::YES, 1'000),
                                                   mk_spec(), empty, 10);
    CHECK(r.status == ExecStatus::RejectedNoCounterparty);
    CHECK(r.filled_qty == 0);
  }
  SECTION("depth depletes across fills within a cycle") {
    ExecutionReport r1 = venue.execute_market_order(mk_order(Side::YES, 15'000),
                                                    mk_spec(), q, 10);
    ExecutionReport r2 = venue.execute_market_order(mk_order(Side::YES, 15'000),
                                                    mk_spec(), q, 10);
    CHECK(r1.status == ExecStatus::Filled);
    CHECK(r1.filled_qty == 15'000);
    CHECK(r2.status == ExecStatus::PartialFill);
    CHECK(r2.filled_qty == 5'000);
    // NO-side liquidity is the YES bid size, untouched by YES-side fills
    ExecutionReport r3 = venue.execute_market_order(mk_order(Side::NO, 40'000),
                                                    mk_spec(), q, 10);
    CHECK(r3.filled_qty == 30'000);
  }
  SECTION("refresh restores depth for the next cycle") {
    venue.execute_market_order(mk_order(Side::YES, 20'000), mk_spec(), q, 10);
    venue.refresh_depth(q);
    ExecutionReport r = venue.execute_market_order(mk_order(Side::YES, 20'000),
                                                   mk_spec(), q, 11);
    CHECK(r.status == ExecStatus::Filled);
  }
}

TEST_CASE("max price guards the taker", "[venue]") {
  SimVenue venue{VenueConfig{ExecMode::Paper, {}, ShareRule::WholeShare}};
  QuoteTop q = mk_quote(480'000, 500'000, 1'000, 1'000);
  ExecutionReport r = venue.execute_market_order(
      mk_order(Side::YES, 1'000, 490'000), mk_spec(), q, 10);
  CHECK(r.status == ExecStatus::RejectedNoCounterparty);
  CHECK(r.filled_qty == 0);
}

TEST_CASE("expired market rejected as defense in depth", "[venue]") {
  SimVenue venue{VenueConfig{}};
  QuoteTop q = mk_quote(480'000, 500'000, 1'000, 1'000);
  ExecutionReport r = venue.execute_market_order(mk_order(Side::YES, 1'000),
                                                 mk_spec(5), q, 10);
  CHECK(r.status == ExecStatus::RejectedRisk);
  CHECK(r.filled_qty == 0);
}

TEST_CASE("fees are charged on the filled quantity", "[venue]") {
  VenueConfig cfg{ExecMode::LiveFidelity,
                  FeeSchedule{FeeKind::QuadraticTaker, 7, 100},
                  ShareRule::WholeShare};
  SimVenue venue{cfg};
  QuoteTop q = mk_quote(480'000, 500'000, 30'000, 20'000);
  venue.refresh_depth(q);
  ExecutionReport r =
      venue.execute_market_order(mk_order(Side::YES, 50'000), mk_spec(), q, 10);
  CHECK(r.filled_qty == 20'000);
  CHECK(r.fee == compute_fee(cfg.fee_schedule, 500'000, 20'000));
}

TEST_CASE("settlements emit exactly once in market order", "[venue]") {
  std::vector<SettlementOutcome> scheduled = {
      {"M3", Outcome::YES, 100},
      {"M1", Outcome::NO, 100},
      {"M2", Outcome::YES, 100},
      {"M4", Outcome::NO, 500},
  };
  SimVenue venue{VenueConfig{}};

  SECTION("nothing before due time") {
    CHECK(venue.settle_due(50, scheduled).empty());
  }
  SECTION("due outcomes sorted by market id, exactly once") {
    auto due = venue.settle_due(100, scheduled);
    REQUIRE(due.size() == 3);
    CHECK(due[0].market_id == "M1");
    CHECK(due[1].market_id == "M2");
    CHECK(due[2].market_id == "M3");
    CHECK(venue.settle_due(100, scheduled).empty()); // second call: nothing new
    auto later = venue.settle_due(500, scheduled);
    REQUIRE(later.size() == 1);
    CHECK(later[0].market_id == "M4");
  }
  SECTION("deterministic across repeated runs") {
    SimVenue v1{VenueConfig{}}, v2{VenueConfig{}};
    auto a = v1.settle_due(100, scheduled);
    auto b = v2.settle_due(100, scheduled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i].market_id == b[i].market_id);
  }
}
