#include <doctest.h>

#include "sttcube/time.hpp"

using namespace sttcube;

TEST_CASE("civil day conversions round trip") {
  CHECK(days_from_civil({1970, 1, 1}) == 0);
  CHECK(days_from_civil({2000, 3, 1}) == 11017);
  for (std::int64_t d = -800000; d < 800000; d += 997) {
    CHECK(days_from_civil(civil_from_days(d)) == d);
  }
  CHECK(civil_from_days(-1) == CivilDate{1969, 12, 31});
}

TEST_CASE("floor division rounds down") {
  CHECK(floor_div(7, 2) == 3);
  CHECK(floor_div(-7, 2) == -4);
  CHECK(floor_div(-8, 2) == -4);
  CHECK(second_of_day(Instant{-1}) == 86399);
}

TEST_CASE("rfc3339 parsing") {
  const auto t = parse_rfc3339("2019-10-20T11:12:13Z");
  REQUIRE(t);
  CHECK(format_rfc3339(*t) == "2019-10-20T11:12:13Z");
  CHECK(parse_rfc3339("2019-10-20T13:12:13+02:00") == t);
  CHECK(parse_rfc3339("2019-10-20T11:12:13.987Z") == t);
  CHECK(parse_rfc3339("2019-10-20T11:12:13") == t);
  CHECK(parse_rfc3339("2019-10-20")->seconds == t->seconds - (11 * 3600 + 12 * 60 + 13));
  CHECK_FALSE(parse_rfc3339("2019-02-30T00:00:00Z"));
  CHECK_FALSE(parse_rfc3339("2019-10-20T25:00:00Z"));
  CHECK_FALSE(parse_rfc3339("yesterday"));
  CHECK_FALSE(parse_rfc3339(""));
}

TEST_CASE("supported range") {
  CHECK(in_supported_range(*parse_rfc3339("0001-01-01T00:00:00Z")));
  CHECK(in_supported_range(*parse_rfc3339("9999-12-31T23:59:59Z")));
  CHECK_FALSE(in_supported_range(Instant{days_from_civil({10000, 1, 1}) * kSecondsPerDay}));
}
