#include "repolens/time_utils.hpp"

#include <cstdio>
#include <stdexcept>

namespace repolens {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp + (mp < 10 ? 3 : -9);
  year = static_cast<int>(y + (month <= 2));
}

Timestamp parse_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &s,
                      &consumed);
  std::string tail;
  if (n >= 7) {
    if (sep != 'T' && sep != ' ') throw std::invalid_argument("bad ISO-8601 timestamp: " + text);
    tail = text.substr(static_cast<std::size_t>(consumed));
  } else if (n >= 3) {
    h = mi = s = 0;
    std::sscanf(text.c_str(), "%d-%d-%d%n", &y, &mo, &d, &consumed);
    tail = text.substr(static_cast<std::size_t>(consumed));
  } else {
    throw std::invalid_argument("bad ISO-8601 timestamp: " + text);
  }
  // Only UTC is accepted; a non-zero offset would silently shift events.
  if (!tail.empty() && tail != "Z" && tail != "+00:00" && tail != ".000Z")
    throw std::invalid_argument("unsupported timestamp suffix: " + text);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    throw std::invalid_argument("bad ISO-8601 timestamp: " + text);
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * kSecondsPerDay +
         h * 3600 + mi * 60 + s;
}

std::string format_iso8601(Timestamp t) {
  std::int64_t z = t / kSecondsPerDay;
  std::int64_t rem = t - z * kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --z;
  }
  int y;
  unsigned mo, d;
  civil_from_days(z, y, mo, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, d,
                static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

std::string format_iso_date(Timestamp t) {
  std::int64_t z = t / kSecondsPerDay;
  if (t - z * kSecondsPerDay < 0) --z;
  int y;
  unsigned mo, d;
  civil_from_days(z, y, mo, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, mo, d);
  return buf;
}

}  // namespace repolens
