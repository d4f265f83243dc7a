#include <doctest.h>

#include <stdexcept>

#include "sttcube/model.hpp"

using namespace sttcube;

TEST_CASE("schema level counts") {
  CHECK(make_schema(SpatialScheme::Semantic, TextualScheme::Replication).level_counts() ==
        std::array<int, kDims>{5, 5, 5, 4});
  CHECK(make_schema(SpatialScheme::Semantic, TextualScheme::Majority).level_counts() ==
        std::array<int, kDims>{5, 5, 4, 4});
  CHECK(make_schema(SpatialScheme::Grid, TextualScheme::Custom, 3).level_counts() ==
        std::array<int, kDims>{5, 4, 4, 4});
  CHECK_NOTHROW(make_schema(SpatialScheme::Grid, TextualScheme::Replication).check());
  CHECK_THROWS_AS(make_schema(SpatialScheme::Grid, TextualScheme::Replication, 0), std::invalid_argument);
  CHECK(make_schema(SpatialScheme::Semantic, TextualScheme::Custom).text_base_level() == 1);
}

TEST_CASE("coordinate names round trip") {
  const auto s = make_schema(SpatialScheme::Semantic, TextualScheme::Replication);
  const Coord c{kMonth, kCity, kTheme, kHour};
  CHECK(coord_name(s, c) == "month.city.theme.hour");
  CHECK(parse_coord(s, "month.city.theme.hour") == c);
  CHECK_FALSE(parse_coord(s, "month.city.theme"));
  CHECK_FALSE(parse_coord(s, "week.city.theme.hour"));
}

TEST_CASE("enum parsing") {
  CHECK(parse_spatial_scheme("grid") == SpatialScheme::Grid);
  CHECK(parse_textual_scheme("majority") == TextualScheme::Majority);
  CHECK_FALSE(parse_textual_scheme("plurality"));
  for (auto m : {Measure::FactCount, Measure::KeywordFrequency, Measure::Density, Measure::Volatility,
                 Measure::TopKDense, Measure::TopKVolatile, Measure::TopKFrequent}) {
    CHECK(parse_measure(to_string(m)) == m);
  }
  CHECK(is_topk(Measure::TopKFrequent));
  CHECK_FALSE(is_topk(Measure::Density));
}

TEST_CASE("keyword sets") {
  KeywordSet all;
  KeywordSet tags{KeywordSet::Kind::HashtagsOnly};
  CHECK(all.contains("apple"));
  CHECK(tags.contains("#love"));
  CHECK_FALSE(tags.contains("apple"));
  CHECK_FALSE(tags.contains(""));
}
