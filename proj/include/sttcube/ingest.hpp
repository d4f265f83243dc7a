#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sttcube/model.hpp"

namespace sttcube {

struct StopwordList {
  std::unordered_set<std::string> words;
  std::string source = "built-in";

  bool contains(std::string_view w) const { return words.count(std::string(w)) != 0; }

  static StopwordList builtin();
  static StopwordList load(const std::filesystem::path& path);
  static StopwordList from_stream(std::istream& in, std::string source);
};

/// Suffix-stripping normalizer applied until no rule fires.
std::string normalize_term(std::string_view word);

/// Lowercases, tokenizes, drops stopwords and letterless tokens, then
/// normalizes. Hashtags keep their spelling apart from case.
std::vector<std::string> preprocess_text(std::string_view raw, const StopwordList& stops);

enum class RecordFormat { Jsonl, Csv };

struct ParsedRecord {
  std::size_t line = 0;  // 1-based input line
  std::optional<SttObject> object;
  RejectReason reason = RejectReason::None;
};

/// One result per input line (the CSV header excluded). Throws
/// std::runtime_error when the stream itself fails.
std::vector<ParsedRecord> parse_records(std::istream& in, RecordFormat format,
                                        const StopwordList& stops);

struct GridConfig {
  double base_cell_size_km = 1.0;
  int coarsening_factor = 3;
  int level_count = 4;
  double reference_lat = 0.0;  // latitude whose parallel keeps true scale

  void check() const;
  double cell_size_km(int level) const;
  double cell_area_km2(int level) const;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct GridCell {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  std::string key() const;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

GridCell grid_cell_of(GeoPoint p, const GridConfig& cfg, int level);
GridCell grid_parent(const GridCell& cell, const GridConfig& cfg);

inline constexpr std::string_view kUnknownMember = "UNKNOWN";

struct GeoMember {
  std::string id;
  std::string level;  // city, region or country
  std::string name;
  std::string parent;  // empty for countries
  std::optional<GeoPoint> rep;
  double area_km2 = 0.0;
};

class GeoTaxonomy {
 public:
  GeoTaxonomy() = default;
  /// Validates levels, parents, points and areas; throws std::runtime_error.
  explicit GeoTaxonomy(std::vector<GeoMember> members);

  static GeoTaxonomy load(const std::filesystem::path& path);
  static GeoTaxonomy from_stream(std::istream& in);

  const std::vector<GeoMember>& members() const noexcept { return members_; }
  const GeoMember* find(std::string_view id) const;
  /// Member indices of one level, in file order.
  const std::vector<std::size_t>& level_members(std::string_view level) const;
  double known_city_area() const noexcept { return known_city_area_; }
  bool empty() const noexcept { return members_.empty(); }

  /// Nearest city id, or kUnknownMember beyond the cutoff.
  std::string nearest_city(GeoPoint p, double cutoff_km) const;

 private:
  std::vector<GeoMember> members_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> cities_, regions_, countries_;
  std::vector<std::size_t> cities_by_lat_;
  double known_city_area_ = 0.0;
};

double haversine_km(GeoPoint a, GeoPoint b);

/// 50 km unless STTCUBE_GEOCODE_CUTOFF_KM holds a positive number.
double default_geocode_cutoff_km();

/// Throws std::runtime_error for an empty taxonomy.
std::string reverse_geocode(GeoPoint p, const GeoTaxonomy& geo,
                            double cutoff_km = default_geocode_cutoff_km());

}  // namespace sttcube
