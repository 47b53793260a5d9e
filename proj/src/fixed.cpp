#include "utm/fixed.hpp"

#include <cmath>
#include <limits>

#include "utm/common.hpp"

namespace utm {

namespace {

__int128 floor_div(__int128 num, __int128 den) {
  __int128 q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

}  // namespace

std::int64_t div_round_half_up(__int128 num, __int128 den) {
  if (den <= 0) throw Error(ErrorCode::InvalidArgument, "non-positive denominator");
  __int128 q = floor_div(2 * num + den, 2 * den);
  if (q > std::numeric_limits<std::int64_t>::max() ||
      q < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::InvalidArgument, "fixed-point overflow");
  }
  return static_cast<std::int64_t>(q);
}

Fixed Fixed::from_ratio(__int128 num, __int128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return from_raw(div_round_half_up(num * kScale, den));
}

Fixed Fixed::from_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
  return from_raw(static_cast<std::int64_t>(std::floor(v * kScale + 0.5)));
}

Fixed Fixed::parse(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::InvalidArgument,
                 "invalid fixed-point literal '" + std::string(text) + "'");
  };
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) throw fail();
  std::int64_t whole = 0;
  std::size_t i = 0;
  for (; i < s.size() && s[i] != '.'; ++i) {
    if (s[i] < '0' || s[i] > '9') throw fail();
    whole = whole * 10 + (s[i] - '0');
    if (whole > std::numeric_limits<std::int64_t>::max() / kScale / 10) throw fail();
  }
  if (i == 0) throw fail();
  std::int64_t frac = 0;
  int digits = 0;
  if (i < s.size()) {
    ++i;
    if (i == s.size()) throw fail();
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9' || digits == 6) throw fail();
      frac = frac * 10 + (s[i] - '0');
      ++digits;
    }
  }
  for (; digits < 6; ++digits) frac *= 10;
  std::int64_t raw = whole * kScale + frac;
  return from_raw(negative ? -raw : raw);
}

std::string Fixed::to_string() const {
  std::int64_t v = raw_;
  std::string out;
  if (v < 0) {
    out.push_back('-');
    v = -v;
  }
  out += std::to_string(v / kScale);
  out.push_back('.');
  std::string frac = std::to_string(v % kScale);
  out.append(6 - frac.size(), '0');
  out += frac;
  return out;
}

}  // namespace utm
