#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sttcube {

/// A UTC instant at second resolution.
struct Instant {
  std::int64_t seconds = 0;  // since 1970-01-01T00:00:00Z

  friend constexpr auto operator<=>(Instant, Instant) = default;
};

inline constexpr std::int64_t kSecondsPerDay = 86400;

struct CivilDate {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  friend constexpr auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// Proleptic Gregorian conversions (days since the epoch).
std::int64_t days_from_civil(CivilDate date) noexcept;
CivilDate civil_from_days(std::int64_t days) noexcept;

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept;

inline std::int64_t day_number(Instant t) noexcept { return floor_div(t.seconds, kSecondsPerDay); }
inline std::int64_t second_of_day(Instant t) noexcept {
  return t.seconds - day_number(t) * kSecondsPerDay;
}

/// Parses RFC 3339 timestamps ("2019-10-20T11:12:13Z", with optional
/// fractional seconds and numeric offsets). A missing zone designator is
/// read as UTC, and a bare date ("2019-10-20") as its midnight.
/// Fractional seconds are truncated.
std::optional<Instant> parse_rfc3339(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Instant t);

/// Valid range for fact timestamps: years 0001 through 9999.
bool in_supported_range(Instant t) noexcept;

}  // namespace sttcube
