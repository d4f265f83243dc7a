#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sttcube/time.hpp"

namespace sttcube {

using MemberId = std::uint32_t;
inline constexpr MemberId kNoMember = std::numeric_limits<MemberId>::max();

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// One raw fact: a location, an ordered list of normalized terms and a timestamp.
struct SttObject {
  GeoPoint location;
  std::vector<std::string> terms;
  Instant timestamp;

  friend bool operator==(const SttObject&, const SttObject&) = default;
};

enum class RejectReason { None, BadCoordinate, EmptyText, BadTimestamp, Malformed };

std::string_view to_string(RejectReason reason);

struct ValidationResult {
  bool accepted = true;
  RejectReason reason = RejectReason::None;

  static ValidationResult accept() { return {}; }
  static ValidationResult reject(RejectReason r) { return {false, r}; }
};

ValidationResult validate(const SttObject& record);

/// Selects which terms count as keywords.
struct KeywordSet {
  enum class Kind { AllTerms, HashtagsOnly };
  Kind kind = Kind::AllTerms;

  bool contains(std::string_view term) const noexcept {
    return kind == Kind::AllTerms || (!term.empty() && term.front() == '#');
  }
  friend bool operator==(const KeywordSet&, const KeywordSet&) = default;
};

enum class Cardinality { OneToOne, OneToMany, ManyToOne, ManyToMany };
std::string_view to_string(Cardinality c);

enum class DimensionKind { Time, Location, Text, Generic };

struct HierarchySchema {
  std::string name;
  DimensionKind kind = DimensionKind::Generic;
  std::vector<std::string> levels;  // finest first, last is "all"
  std::vector<Cardinality> steps;   // steps[i] links levels[i] -> levels[i+1]
  Cardinality fact_link = Cardinality::ManyToOne;  // fact -> levels[0]

  friend bool operator==(const HierarchySchema&, const HierarchySchema&) = default;
};

enum class SpatialScheme { Grid, Semantic };
enum class TextualScheme { Replication, Majority, Custom };

std::string_view to_string(SpatialScheme s);
std::string_view to_string(TextualScheme s);
std::optional<SpatialScheme> parse_spatial_scheme(std::string_view s);
std::optional<TextualScheme> parse_textual_scheme(std::string_view s);

// Lattice coordinate slots. A cuboid coordinate holds one level index per slot.
inline constexpr int kDateDim = 0;
inline constexpr int kSpatialDim = 1;
inline constexpr int kTextDim = 2;
inline constexpr int kTodDim = 3;
inline constexpr int kDims = 4;

using Coord = std::array<std::uint8_t, kDims>;

enum DateLevel : int { kDay = 0, kMonth, kQuarter, kYear, kDateAll };
enum TodLevel : int { kSecond = 0, kMinute, kHour, kTodAll };
enum SemanticLevel : int { kLocation = 0, kCity, kRegion, kCountry, kSemanticAll };
// Absolute textual levels. Under majority and custom schemes the textual
// hierarchy starts at Theme, so coordinate index = absolute level - 1.
enum TextLevel : int { kTerm = 0, kTheme, kTopic, kConcept, kTextAll };

struct CubeSchema {
  std::vector<HierarchySchema> hierarchies;  // date, spatial, text, time-of-day, generic...
  SpatialScheme spatial = SpatialScheme::Semantic;
  TextualScheme textual = TextualScheme::Replication;

  /// Level counts of the four lattice slots.
  std::array<int, kDims> level_counts() const;
  /// Absolute textual level of coordinate index 0.
  int text_base_level() const noexcept { return textual == TextualScheme::Replication ? 0 : 1; }
  /// Throws std::invalid_argument when an invariant does not hold.
  void check() const;

  friend bool operator==(const CubeSchema&, const CubeSchema&) = default;
};

CubeSchema make_schema(SpatialScheme spatial, TextualScheme textual, int grid_levels = 4);

std::string coord_name(const CubeSchema& schema, const Coord& c);
std::optional<Coord> parse_coord(const CubeSchema& schema, std::string_view name);

/// Aggregated measures of one (date, spatial, time-of-day) group.
struct MeasureCell {
  std::uint64_t fact_count = 0;
  std::vector<std::pair<std::string, std::uint64_t>> keyword_freqs;  // ranked
  double surface_area = 0.0;
  bool truncated = false;
  std::uint64_t boundary = 0;  // frequency of the first dropped keyword
};

enum class Measure {
  FactCount,
  KeywordFrequency,
  Density,
  Volatility,
  TopKDense,
  TopKVolatile,
  TopKFrequent
};

std::string_view to_string(Measure m);
std::optional<Measure> parse_measure(std::string_view s);
bool is_topk(Measure m) noexcept;

struct TimeRange {
  Instant from;
  Instant to;  // exclusive
};

struct QuerySpec {
  Measure measure = Measure::TopKDense;
  int spatial_level = kCity;                  // index in the spatial hierarchy
  std::vector<std::string> members;           // empty selects All
  std::optional<int> group_by_spatial_level;  // at or below spatial_level
  int textual_level = kTerm;                  // absolute textual level
  std::vector<std::string> keywords;          // optional filter
  std::optional<TimeRange> range;
  int intervals = 1;
  std::optional<std::size_t> k;  // nullopt means ALL
  SpatialScheme spatial_scheme = SpatialScheme::Semantic;
  TextualScheme textual_scheme = TextualScheme::Replication;
  bool group_by_time = false;
};

}  // namespace sttcube
