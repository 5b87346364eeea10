#pragma once

#include <json.hpp>

#include "pmsim/money.hpp"

namespace pmsim {

using json = nlohmann::json;

enum class FeeKind { Zero, QuadraticTaker };

inline const char* to_string(FeeKind k) {
  return k == FeeKind::Zero ? "Zero" : "QuadraticTaker";
}

inline FeeKind fee_kind_from_string(const std::string& s) {
  if (s == "Zero") return FeeKind::Zero;
  if (s == "QuadraticTaker") return FeeKind::QuadraticTaker;
  throw ValidationError("unknown fee kind: " + s);
}

// QuadraticTaker: rate * p * (1-p) per share (p = price as probability),
// rounded up to the next cent. The rate is kept as an exact rational.
struct FeeSchedule {
  FeeKind kind = FeeKind::Zero;
  std::int64_t rate_num = 7;
  std::int64_t rate_den = 100;
};

inline Micro compute_fee(const FeeSchedule& s, Micro price, MilliShares qty) {
  if (price < 0 || price > kMicroPerDollar)
    throw ValidationError("compute_fee: price out of range");
  if (qty <= 0) throw ValidationError("compute_fee: qty must be positive");
  if (s.kind == FeeKind::Zero) return 0;
  if (s.rate_num == 0) return 0;
  // exact fee in micro-dollars = num * price * (1M - price) * qty
  //                              / (den * 1e6 * 1e6 * 1e3) * 1e6
  // then take the ceiling at cent resolution.
  unsigned __int128 numer = static_cast<unsigned __int128>(s.rate_num) * price;
  numer *= static_cast<unsigned __int128>(kMicroPerDollar - price);
  numer *= static_cast<unsigned __int128>(qty);
  unsigned __int128 denom_per_cent =
      static_cast<unsigned __int128>(s.rate_den) * 1'000'000'000ULL *
      static_cast<unsigned __int128>(kMicroPerCent);
  unsigned __int128 fee_cents = (numer + denom_per_cent - 1) / denom_per_cent;
  return static_cast<Micro>(fee_cents) * kMicroPerCent;
}

inline void to_json(json& j, const FeeSchedule& s) {
  j = json{{"kind", to_string(s.kind)},
           {"rate_num", s.rate_num},
           {"rate_den", s.rate_den}};
}

inline void from_json(const json& j, FeeSchedule& s) {
  FeeSchedule d;
  if (j.contains("kind")) s.kind = fee_kind_from_string(j.at("kind").get<std::string>());
  s.rate_num = j.value("rate_num", d.rate_num);
  s.rate_den = j.value("rate_den", d.rate_den);
  if (s.rate_num < 0 || s.rate_den <= 0)
    throw ValidationError("fee rate must be a nonnegative rational");
}

} // namespace pmsim
