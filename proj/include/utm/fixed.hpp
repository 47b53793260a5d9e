#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace utm {

/// floor(num/den + 1/2) for den > 0, i.e. round to nearest with ties
/// toward +infinity.
std::int64_t div_round_half_up(__int128 num, __int128 den);

/// Signed decimal fixed-point on a 10^-6 grid.
class Fixed {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Fixed() = default;

  static constexpr Fixed from_raw(std::int64_t raw) {
    Fixed f;
    f.raw_ = raw;
    return f;
  }
  static constexpr Fixed from_int(std::int64_t v) { return from_raw(v * kScale); }
  static Fixed from_ratio(__int128 num, __int128 den);
  /// Config convenience; rounds to the nearest grid point.
  static Fixed from_double(double v);
  /// Parses "-0.75", "1", "0.333333". At most six fractional digits.
  static Fixed parse(std::string_view text);

  constexpr std::int64_t raw() const { return raw_; }
  double to_double() const { return static_cast<double>(raw_) / kScale; }
  /// Canonical form: optional '-', integer part, '.', exactly six digits.
  std::string to_string() const;

  constexpr auto operator<=>(const Fixed&) const = default;

 private:
  std::int64_t raw_ = 0;
};

}  // namespace utm
