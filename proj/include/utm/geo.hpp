#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "utm/common.hpp"

// Flat-grid geometry. Positions are whole arcseconds; one arcsecond is
// taken as 1852/60 m on both axes (no latitude correction).

namespace utm {

inline constexpr std::int64_t kMetresPerArcminute = 1852;
inline constexpr double kMetresPerArcsecond = 1852.0 / 60.0;
inline constexpr std::int32_t kMaxLatArcsec = 90 * 3600;
inline constexpr std::int32_t kMaxLonArcsec = 180 * 3600;

struct DmsPoint {
  std::int32_t lat_arcsec = 0;
  std::int32_t lon_arcsec = 0;

  auto operator<=>(const DmsPoint&) const = default;
};

/// Parses "+DD°MM′SS″" (ASCII ' and " are accepted for the primes).
std::int32_t parse_dms_angle(std::string_view text, bool latitude);
std::string format_dms_angle(std::int32_t arcsec, bool latitude);

/// "lat,lon", each in the angle format above.
DmsPoint parse_dms_point(std::string_view text);
std::string format_dms_point(const DmsPoint& p);

bool in_range(const DmsPoint& p);

struct GeoCell {
  std::int64_t lat_index = 0;
  std::int64_t lon_index = 0;

  auto operator<=>(const GeoCell&) const = default;
};

std::string format_cell(const GeoCell& c);

GeoCell cell_of(const DmsPoint& p, std::int32_t cell_size_m);
DmsPoint cell_center(const GeoCell& c, std::int32_t cell_size_m);

/// Chebyshev distance in cells.
std::int64_t cell_distance(const GeoCell& a, const GeoCell& b);

double distance_m(const DmsPoint& a, const DmsPoint& b);

/// Moves `p` by whole metres; results are rounded to the arcsecond grid.
DmsPoint offset_m(const DmsPoint& p, double north_m, double east_m);

/// Straight-line position at `t`, clamped to the endpoints. Each axis is
/// rounded half-up to the arcsecond.
DmsPoint interpolate(const DmsPoint& from, const DmsPoint& to, Timestamp start,
                     Timestamp end, Timestamp t);

// Mission calendar: dates are "ddmmyyyy", times "hhmm".

void validate_date(std::string_view ddmmyyyy);
void validate_time(std::string_view hhmm);

/// Seconds from midnight of `epoch_ddmmyyyy` to the given departure.
Timestamp to_timestamp(std::string_view ddmmyyyy, std::string_view hhmm,
                       std::string_view epoch_ddmmyyyy);

std::string format_date(Timestamp t, std::string_view epoch_ddmmyyyy);
std::string format_time(Timestamp t);

}  // namespace utm
