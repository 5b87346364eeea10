#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pmsim {

// All money amounts are integer micro-dollars ($1 == 1,000,000).
// All contract quantities are integer milli-shares (1 share == 1,000).
// A winning contract pays $1.00 per share, so a price in micro-dollars
// doubles as a probability in parts-per-million.
using Micro = std::int64_t;       // micro-dollars
using MilliShares = std::int64_t; // milli-shares
using Ppm = std::int64_t;         // parts-per-million probability
using Cpp = std::int64_t;         // centi-percentage-points (0.01 %)

inline constexpr Micro kMicroPerDollar = 1'000'000;
inline constexpr Micro kMicroPerCent = 10'000;
inline constexpr Micro kPayoutPerShare = 1'000'000; // $1.00
inline constexpr MilliShares kSharesScale = 1'000;  // milli-shares per share
inline constexpr Ppm kPpmOne = 1'000'000;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// qty (milli-shares) * price (micro-dollars per share) is exact in
// nano-dollars: 1 micro-dollar == 1,000 nano-dollars.
inline std::int64_t cost_nano(MilliShares qty, Micro price) {
  return qty * price;
}

// Truncate nano-dollars toward zero into micro-dollars; the discarded
// remainder feeds the ledger's dust counter.
struct MicroWithRem {
  Micro micro;
  std::int64_t rem_nano; // same sign as the input, |rem| < 1000
};

inline MicroWithRem nano_to_micro_trunc(std::int64_t nano) {
  Micro m = nano / 1000;
  return {m, nano - m * 1000};
}

// Round-half-even division, den > 0.
inline std::int64_t rhe_div(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ValidationError("rhe_div: denominator must be positive");
  std::int64_t q = num / den;
  std::int64_t r = num % den; // sign follows num
  if (r == 0) return q;
  std::int64_t step = num < 0 ? -1 : 1;
  std::int64_t twice = (r < 0 ? -r : r) * 2;
  if (twice > den) return q + step;
  if (twice < den) return q;
  return (q % 2 == 0) ? q : q + step; // exact half: take the even quotient
}

inline std::int64_t rhe_div_i128(__int128 num, __int128 den) {
  if (den <= 0) throw ValidationError("rhe_div: denominator must be positive");
  __int128 q = num / den;
  __int128 r = num % den;
  if (r != 0) {
    __int128 step = num < 0 ? -1 : 1;
    __int128 twice = (r < 0 ? -r : r) * 2;
    if (twice > den)
      q += step;
    else if (twice == den && (q % 2) != 0)
      q += step;
  }
  return static_cast<std::int64_t>(q);
}

// Ratio as centi-percentage-points (1 cpp == 0.01 %), round-half-even.
inline Cpp ratio_cpp(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ValidationError("ratio_cpp: denominator must be positive");
  return rhe_div_i128(static_cast<__int128>(num) * 10'000, den);
}

// "-16.01%" style rendering of centi-percentage-points.
inline std::string format_cpp(Cpp v) {
  bool neg = v < 0;
  std::int64_t a = neg ? -v : v;
  std::string s = (neg ? "-" : "") + std::to_string(a / 100) + ".";
  std::int64_t frac = a % 100;
  if (frac < 10) s += "0";
  s += std::to_string(frac) + "%";
  return s;
}

// Micro-dollars as a plain decimal dollar amount, cents resolution,
// round-half-even (e.g. -1601.00). Used by reports.
inline std::string format_dollars(Micro v) {
  std::int64_t cents = rhe_div(v, kMicroPerCent);
  bool neg = cents < 0;
  std::int64_t a = neg ? -cents : cents;
  std::string s = (neg ? "-" : "") + std::to_string(a / 100) + ".";
  std::int64_t frac = a % 100;
  if (frac < 10) s += "0";
  s += std::to_string(frac);
  return s;
}

inline Micro dollars(std::int64_t d) { return d * kMicroPerDollar; }
inline Micro cents(std::int64_t c) { return c * kMicroPerCent; }

} // namespace pmsim
