#include "utm/geo.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "utm/fixed.hpp"

namespace utm {

namespace {

constexpr std::string_view kDegree = "\xC2\xB0";
constexpr std::string_view kPrime = "\xE2\x80\xB2";
constexpr std::string_view kDoublePrime = "\xE2\x80\xB3";

Error dms_error(std::string_view text, const char* why) {
  return Error(ErrorCode::InvalidDms,
               "invalid DMS '" + std::string(text) + "': " + why);
}

int take_digits(std::string_view& s, int min_digits, int max_digits) {
  int value = 0;
  int n = 0;
  while (n < max_digits && !s.empty() && s.front() >= '0' && s.front() <= '9') {
    value = value * 10 + (s.front() - '0');
    s.remove_prefix(1);
    ++n;
  }
  return n >= min_digits ? value : -1;
}

bool take_any(std::string_view& s, std::string_view a, std::string_view b) {
  for (auto tok : {a, b}) {
    if (!tok.empty() && s.starts_with(tok)) {
      s.remove_prefix(tok.size());
      return true;
    }
  }
  return false;
}

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

std::chrono::year_month_day parse_ymd(std::string_view ddmmyyyy) {
  auto bad = [&] {
    return Error(ErrorCode::InvalidDeparture,
                 "invalid date '" + std::string(ddmmyyyy) + "', expected ddmmyyyy");
  };
  if (ddmmyyyy.size() != 8) throw bad();
  std::string_view s = ddmmyyyy;
  int d = take_digits(s, 2, 2);
  int m = take_digits(s, 2, 2);
  int y = take_digits(s, 4, 4);
  if (d < 0 || m < 0 || y < 0) throw bad();
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw bad();
  return ymd;
}

int parse_hhmm(std::string_view hhmm) {
  auto bad = [&] {
    return Error(ErrorCode::InvalidDeparture,
                 "invalid time '" + std::string(hhmm) + "', expected hhmm");
  };
  if (hhmm.size() != 4) throw bad();
  std::string_view s = hhmm;
  int h = take_digits(s, 2, 2);
  int m = take_digits(s, 2, 2);
  if (h < 0 || m < 0 || h > 23 || m > 59) throw bad();
  return h * 60 + m;
}

std::string two_digits(int v) {
  return v < 10 ? "0" + std::to_string(v) : std::to_string(v);
}

}  // namespace

std::int32_t parse_dms_angle(std::string_view text, bool latitude) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  int deg = take_digits(s, 1, 3);
  if (deg < 0 || !take_any(s, kDegree, "")) throw dms_error(text, "degrees");
  int min = take_digits(s, 1, 2);
  if (min < 0 || !take_any(s, kPrime, "'")) throw dms_error(text, "minutes");
  int sec = take_digits(s, 1, 2);
  if (sec < 0 || !take_any(s, kDoublePrime, "\"")) throw dms_error(text, "seconds");
  if (!s.empty()) throw dms_error(text, "trailing characters");
  if (min >= 60 || sec >= 60) throw dms_error(text, "minutes/seconds out of range");
  std::int32_t total = deg * 3600 + min * 60 + sec;
  std::int32_t limit = latitude ? kMaxLatArcsec : kMaxLonArcsec;
  if (total > limit) throw dms_error(text, latitude ? "latitude beyond 90" : "longitude beyond 180");
  return negative ? -total : total;
}

std::string format_dms_angle(std::int32_t arcsec, bool latitude) {
  std::string out(1, arcsec < 0 ? '-' : '+');
  std::int32_t v = std::abs(arcsec);
  std::string deg = std::to_string(v / 3600);
  std::size_t width = latitude ? 2 : 3;
  if (deg.size() < width) out.append(width - deg.size(), '0');
  out += deg;
  out += kDegree;
  out += two_digits((v / 60) % 60);
  out += kPrime;
  out += two_digits(v % 60);
  out += kDoublePrime;
  return out;
}

DmsPoint parse_dms_point(std::string_view text) {
  auto comma = text.find(',');
  if (comma == std::string_view::npos) throw dms_error(text, "expected 'lat,lon'");
  return DmsPoint{parse_dms_angle(text.substr(0, comma), true),
                  parse_dms_angle(text.substr(comma + 1), false)};
}

std::string format_dms_point(const DmsPoint& p) {
  return format_dms_angle(p.lat_arcsec, true) + "," +
         format_dms_angle(p.lon_arcsec, false);
}

bool in_range(const DmsPoint& p) {
  return std::abs(p.lat_arcsec) <= kMaxLatArcsec &&
         std::abs(p.lon_arcsec) <= kMaxLonArcsec;
}

std::string format_cell(const GeoCell& c) {
  return std::to_string(c.lat_index) + ":" + std::to_string(c.lon_index);
}

GeoCell cell_of(const DmsPoint& p, std::int32_t cell_size_m) {
  std::int64_t den = 60LL * cell_size_m;
  return GeoCell{floor_div(std::int64_t{p.lat_arcsec} * kMetresPerArcminute, den),
                 floor_div(std::int64_t{p.lon_arcsec} * kMetresPerArcminute, den)};
}

DmsPoint cell_center(const GeoCell& c, std::int32_t cell_size_m) {
  auto center = [&](std::int64_t idx) {
    return static_cast<std::int32_t>(
        div_round_half_up(static_cast<__int128>(2 * idx + 1) * 60 * cell_size_m,
                          2 * kMetresPerArcminute));
  };
  return DmsPoint{center(c.lat_index), center(c.lon_index)};
}

std::int64_t cell_distance(const GeoCell& a, const GeoCell& b) {
  return std::max(std::abs(a.lat_index - b.lat_index),
                  std::abs(a.lon_index - b.lon_index));
}

double distance_m(const DmsPoint& a, const DmsPoint& b) {
  double dlat = static_cast<double>(a.lat_arcsec) - b.lat_arcsec;
  double dlon = static_cast<double>(a.lon_arcsec) - b.lon_arcsec;
  return std::hypot(dlat, dlon) * kMetresPerArcsecond;
}

DmsPoint offset_m(const DmsPoint& p, double north_m, double east_m) {
  return DmsPoint{
      p.lat_arcsec + static_cast<std::int32_t>(std::floor(north_m / kMetresPerArcsecond + 0.5)),
      p.lon_arcsec + static_cast<std::int32_t>(std::floor(east_m / kMetresPerArcsecond + 0.5))};
}

DmsPoint interpolate(const DmsPoint& from, const DmsPoint& to, Timestamp start,
                     Timestamp end, Timestamp t) {
  if (t <= start || end <= start) return t < end ? from : to;
  if (t >= end) return to;
  auto axis = [&](std::int32_t a, std::int32_t b) {
    __int128 num = static_cast<__int128>(b - a) * (t - start);
    return static_cast<std::int32_t>(a + div_round_half_up(num, end - start));
  };
  return DmsPoint{axis(from.lat_arcsec, to.lat_arcsec),
                  axis(from.lon_arcsec, to.lon_arcsec)};
}

void validate_date(std::string_view ddmmyyyy) { parse_ymd(ddmmyyyy); }

void validate_time(std::string_view hhmm) { parse_hhmm(hhmm); }

Timestamp to_timestamp(std::string_view ddmmyyyy, std::string_view hhmm,
                       std::string_view epoch_ddmmyyyy) {
  using namespace std::chrono;
  auto days = sys_days(parse_ymd(ddmmyyyy)) - sys_days(parse_ymd(epoch_ddmmyyyy));
  return static_cast<Timestamp>(days.count()) * 86400 + parse_hhmm(hhmm) * 60LL;
}

std::string format_date(Timestamp t, std::string_view epoch_ddmmyyyy) {
  using namespace std::chrono;
  auto day = sys_days(parse_ymd(epoch_ddmmyyyy)) +
             days{static_cast<int>(floor_div(t, 86400))};
  year_month_day ymd{day};
  std::string year = std::to_string(static_cast<int>(ymd.year()));
  if (year.size() < 4) year.insert(0, 4 - year.size(), '0');
  return two_digits(static_cast<int>(static_cast<unsigned>(ymd.day()))) +
         two_digits(static_cast<int>(static_cast<unsigned>(ymd.month()))) + year;
}

std::string format_time(Timestamp t) {
  std::int64_t minute_of_day = floor_div(t, 60) - floor_div(t, 86400) * 1440;
  return two_digits(static_cast<int>(minute_of_day / 60)) +
         two_digits(static_cast<int>(minute_of_day % 60));
}

}  // namespace utm
