#include <catch2/catch_amalgamated.hpp>

#include "pmsim/market.hpp"
#include "pmsim/rng.hpp"

using namespace pmsim;

namespace {
QuoteTop yes_quote(Micro bid, Micro ask) {
  QuoteTop q;
  q.market_id = "M";
  q.yes_bid = bid;
  q.yes_ask = ask;
  return q;
}
} // namespace

TEST_CASE("derive_complement mirrors the YES book", "[market]") {
  SECTION("symmetric spread about 0.50") {
    QuoteTop q = derive_complement(yes_quote(480'000, 520'000));
    CHECK(q.no_bid == 480'000);
    CHECK(q.no_ask == 520'000);
  }
  SECTION("degenerate full-width book") {
    QuoteTop q = derive_complement(yes_quote(0, 1'000'000));
    CHECK(q.no_bid == 0);
    CHECK(q.no_ask == 1'000'000);
  }
  SECTION("shifted book") {
    QuoteTop q = derive_complement(yes_quote(400'000, 450'000));
    CHECK(q.no_bid == 550'000);
    CHECK(q.no_ask == 600'000);
    CHECK(q.no_bid + q.yes_ask == kMicroPerDollar);
    CHECK(q.no_ask + q.yes_bid == kMicroPerDollar);
  }
  SECTION("YES fields unchanged") {
    QuoteTop in = yes_quote(123'456, 234'567);
    in.yes_bid_size = 42;
    QuoteTop q = derive_complement(in);
    CHECK(q.yes_bid == 123'456);
    CHECK(q.yes_ask == 234'567);
    CHECK(q.yes_bid_size == 42);
  }
  SECTION("crossed input rejected") {
    CHECK_THROWS_AS(derive_complement(yes_quote(600'000, 400'000)),
                    ValidationError);
  }
}

TEST_CASE("complement consistency is exact on random books", "[market]") {
  Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    Micro bid = rng.range(0, kMicroPerDollar);
    Micro ask = rng.range(bid, kMicroPerDollar);
    QuoteTop q = derive_complement(yes_quote(bid, ask));
    REQUIRE(q.no_bid == kMicroPerDollar - q.yes_ask);
    REQUIRE(q.no_ask == kMicroPerDollar - q.yes_bid);
    REQUIRE(q.no_bid <= q.no_ask);
    REQUIRE(q.no_bid >= 0);
    REQUIRE(q.no_ask <= kMicroPerDollar);
    REQUIRE_NOTHROW(validate(q));
  }
}

TEST_CASE("market spec validation", "[market]") {
  MarketSpec m;
  m.market_id = "KXINX-0001";
  m.series_id = "KXINX";
  m.listed_at = 1000;
  m.expiry = 2000;
  m.tick = 10'000;
  CHECK_NOTHROW(validate(m));

  SECTION("expiry must follow listing") {
    m.expiry = m.listed_at;
    CHECK_THROWS_AS(validate(m), ValidationError);
  }
  SECTION("tick must divide a dollar") {
    m.tick = 30'000;
    CHECK_THROWS_AS(validate(m), ValidationError);
  }
  SECTION("probability range") {
    m.true_prob = 1'000'001;
    CHECK_THROWS_AS(validate(m), ValidationError);
  }
}

TEST_CASE("enum string round trips", "[market]") {
  for (Category c : kAllCategories)
    CHECK(category_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(category_from_string("Esports"), ValidationError);
  for (Side s : {Side::YES, Side::NO})
    CHECK(side_from_string(to_string(s)) == s);
  for (Outcome o : {Outcome::YES, Outcome::NO, Outcome::VOID})
    CHECK(outcome_from_string(to_string(o)) == o);
  CHECK(opposite(Side::YES) == Side::NO);
  CHECK(opposite(Side::NO) == Side::YES);
}

TEST_CASE("quote json round trip keeps optional last_price", "[market]") {
  QuoteTop q = derive_complement(yes_quote(400'000, 450'000));
  q.volume = 12'345;
  q.as_of = 777;
  QuoteTop back = json(q).get<QuoteTop>();
  CHECK_FALSE(back.last_price.has_value());
  q.last_price = 425'000;
  back = json(q).get<QuoteTop>();
  REQUIRE(back.last_price.has_value());
  CHECK(*back.last_price == 425'000);
  CHECK(back.volume == 12'345);
}

TEST_CASE("curated series seeds cover all seven categories", "[market]") {
  std::set<Category> seen;
  for (const SeriesSeed& s : kSeriesSeeds) seen.insert(s.category);
  CHECK(seen.size() == kAllCategories.size());
  CHECK(kSeriesSeeds.size() == 29);
}
