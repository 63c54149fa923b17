#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace corelog {

/// An instant in time with millisecond precision, stored as elapsed
/// milliseconds since the Unix epoch. Inputs may carry any UTC offset;
/// instants compare and serialize in UTC ("...Z"), which keeps the
/// canonical form unique per instant.
struct Timestamp {
  static constexpr std::int64_t kUnset = INT64_MIN;

  std::int64_t epoch_ms = kUnset;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t ms) : epoch_ms(ms) {}

  bool is_set() const { return epoch_ms != kUnset; }
  auto operator<=>(const Timestamp&) const = default;

  static constexpr Timestamp unset() { return Timestamp{}; }

  std::string to_iso8601() const;
};

namespace detail {

// Civil-date conversions (Howard Hinnant's algorithms).
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

inline bool parse_uint(std::string_view s, size_t& pos, int digits, int& out) {
  if (pos + digits > s.size()) return false;
  int v = 0;
  for (int i = 0; i < digits; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += digits;
  out = v;
  return true;
}

}  // namespace detail

inline std::string Timestamp::to_iso8601() const {
  std::int64_t ms = epoch_ms;
  std::int64_t days = ms / 86400000;
  std::int64_t rem = ms % 86400000;
  if (rem < 0) {
    rem += 86400000;
    days -= 1;
  }
  std::int64_t y;
  unsigned mo, d;
  detail::civil_from_days(days, y, mo, d);
  const int h = static_cast<int>(rem / 3600000);
  const int mi = static_cast<int>(rem / 60000 % 60);
  const int s = static_cast<int>(rem / 1000 % 60);
  const int frac = static_cast<int>(rem % 1000);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<long long>(y), mo, d, h, mi, s, frac);
  return buf;
}

struct ParsedTimestamp {
  Timestamp value;
  bool had_offset = false;  // false: input carried no zone, UTC was assumed
};

/// Parses ISO-8601 "YYYY-MM-DD[Thh:mm[:ss[.fff]]][Z|±hh:mm]". A missing
/// offset is read as UTC; callers flag that case (diagnostic W002).
inline std::optional<ParsedTimestamp> parse_timestamp(std::string_view s) {
  size_t pos = 0;
  int year, mon, day;
  bool neg_year = false;
  if (!s.empty() && s[0] == '-') {
    neg_year = true;
    pos = 1;
  }
  if (!detail::parse_uint(s, pos, 4, year)) return std::nullopt;
  if (neg_year) year = -year;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!detail::parse_uint(s, pos, 2, mon)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!detail::parse_uint(s, pos, 2, day)) return std::nullopt;
  if (mon < 1 || mon > 12 || day < 1 || day > 31) return std::nullopt;

  int h = 0, mi = 0, sec = 0, frac_ms = 0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (!detail::parse_uint(s, pos, 2, h)) return std::nullopt;
    if (pos >= s.size() || s[pos] != ':') return std::nullopt;
    ++pos;
    if (!detail::parse_uint(s, pos, 2, mi)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!detail::parse_uint(s, pos, 2, sec)) return std::nullopt;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int scale = 100;
        int ndig = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          if (ndig < 3) frac_ms += (s[pos] - '0') * scale;
          scale /= 10;
          ++ndig;
          ++pos;
        }
        if (ndig == 0) return std::nullopt;
      }
    }
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  }

  std::int64_t offset_min = 0;
  bool had_offset = false;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      had_offset = true;
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const bool neg = s[pos] == '-';
      ++pos;
      int oh, om = 0;
      if (!detail::parse_uint(s, pos, 2, oh)) return std::nullopt;
      if (pos < s.size() && s[pos] == ':') {
        ++pos;
        if (!detail::parse_uint(s, pos, 2, om)) return std::nullopt;
      } else if (pos + 2 <= s.size()) {
        if (!detail::parse_uint(s, pos, 2, om)) return std::nullopt;
      }
      offset_min = oh * 60 + om;
      if (neg) offset_min = -offset_min;
      had_offset = true;
    }
  }
  if (pos != s.size()) return std::nullopt;

  const std::int64_t days = detail::days_from_civil(year, static_cast<unsigned>(mon),
                                                    static_cast<unsigned>(day));
  std::int64_t ms = days * 86400000 + h * 3600000LL + mi * 60000LL + sec * 1000LL + frac_ms;
  ms -= offset_min * 60000;
  return ParsedTimestamp{Timestamp{ms}, had_offset};
}

}  // namespace corelog
