#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace calmnet {

using Timestamp = std::int64_t;  // seconds since the Unix epoch, UTC
using DayIndex = std::int64_t;   // calendar days since 1970-01-01 (cohort-local)

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr int kMinutesPerDay = 1440;

/// Study-site offset from UTC, in hours. Day boundaries throughout the
/// pipeline are local midnights under this offset; override it per cohort.
inline constexpr int kDefaultUtcOffsetHours = -5;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Local calendar day containing `ts`.
inline DayIndex local_day(Timestamp ts, int utc_offset_hours) {
  return floor_div(ts + static_cast<std::int64_t>(utc_offset_hours) * 3600, kSecondsPerDay);
}

/// UTC timestamp of local midnight opening day `day`.
inline Timestamp day_start_utc(DayIndex day, int utc_offset_hours) {
  return day * kSecondsPerDay - static_cast<std::int64_t>(utc_offset_hours) * 3600;
}

/// 0 = Monday ... 6 = Sunday. 1970-01-01 was a Thursday.
inline int day_of_week(DayIndex day) {
  return static_cast<int>(((day % 7) + 7 + 3) % 7);
}

inline bool is_weekend(DayIndex day) {
  const int dow = day_of_week(day);
  return dow == 5 || dow == 6;
}

/// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
inline DayIndex days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<DayIndex>(era) * 146097 + static_cast<DayIndex>(doe) - 719468;
}

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};

inline CivilDate civil_from_days(DayIndex z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), m, d};
}

/// Parses "YYYY-MM-DD" to a day index; throws std::invalid_argument otherwise.
inline DayIndex parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw std::invalid_argument("expected date YYYY-MM-DD, got '" + s + "'");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9')
      throw std::invalid_argument("expected date YYYY-MM-DD, got '" + s + "'");
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw std::invalid_argument("date out of range: '" + s + "'");
  return days_from_civil(y, m, d);
}

inline std::string format_date(DayIndex day) {
  const CivilDate c = civil_from_days(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
  return std::string(buf);
}

}  // namespace calmnet
