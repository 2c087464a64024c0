#pragma once

#include <cstdint>
#include <string>

namespace repolens {

using Timestamp = std::int64_t;  // seconds since 1970-01-01T00:00:00Z

constexpr Timestamp kSecondsPerDay = 86400;

constexpr Timestamp days(std::int64_t n) { return n * kSecondsPerDay; }

// Proleptic Gregorian calendar arithmetic, no time zones involved.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day);

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS", and the same with a trailing
// 'Z' or "+00:00". Throws std::invalid_argument on anything else.
Timestamp parse_iso8601(const std::string& text);

std::string format_iso8601(Timestamp t);   // "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso_date(Timestamp t);  // "YYYY-MM-DD"

}  // namespace repolens
