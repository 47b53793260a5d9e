#pragma once

// Exact-rational evaluation of the pricing and reputation formulas.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational grid(std::int64_t raw) { return Rational(raw, 1'000'000); }

inline Rational exact_reputation(std::uint64_t r, std::uint64_t p) {
  return Rational(BigInt(r) - BigInt(p), BigInt(r) + BigInt(p) + 2);
}

inline Rational exact_update_k(const Rational& R, const Rational& k_prev,
                               const Rational& alpha, const Rational& k_min) {
  Rational k = (1 - (R + 1) / 2) * alpha + k_prev * (1 - alpha);
  return k < k_min ? k_min : k;
}

inline Rational exact_fee(const Rational& k, std::int64_t d, std::int64_t c, std::int64_t a) {
  return k * d + c + a;
}

/// Distance from `value` to `exact`, measured in 10^-6 grid units.
inline Rational grid_units_apart(std::int64_t raw, const Rational& exact) {
  Rational diff = grid(raw) - exact;
  if (diff < 0) diff = -diff;
  return diff * 1'000'000;
}

}  // namespace oracle
