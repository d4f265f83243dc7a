#include "sttcube/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sttcube {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "none";
    case RejectReason::BadCoordinate: return "bad-coordinate";
    case RejectReason::EmptyText: return "empty-text";
    case RejectReason::BadTimestamp: return "bad-timestamp";
    case RejectReason::Malformed: return "malformed";
  }
  return "unknown";
}

ValidationResult validate(const SttObject& record) {
  const auto& p = record.location;
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
      p.lon < -180.0 || p.lon > 180.0) {
    return ValidationResult::reject(RejectReason::BadCoordinate);
  }
  if (record.terms.empty()) return ValidationResult::reject(RejectReason::EmptyText);
  for (const auto& t : record.terms) {
    if (t.empty()) return ValidationResult::reject(RejectReason::EmptyText);
  }
  if (!in_supported_range(record.timestamp)) {
    return ValidationResult::reject(RejectReason::BadTimestamp);
  }
  return ValidationResult::accept();
}

std::string_view to_string(Cardinality c) {
  switch (c) {
    case Cardinality::OneToOne: return "1-1";
    case Cardinality::OneToMany: return "1-n";
    case Cardinality::ManyToOne: return "n-1";
    case Cardinality::ManyToMany: return "n-n";
  }
  return "?";
}

std::string_view to_string(SpatialScheme s) {
  return s == SpatialScheme::Grid ? "grid" : "semantic";
}

std::string_view to_string(TextualScheme s) {
  switch (s) {
    case TextualScheme::Replication: return "replication";
    case TextualScheme::Majority: return "majority";
    case TextualScheme::Custom: return "custom";
  }
  return "?";
}

std::optional<SpatialScheme> parse_spatial_scheme(std::string_view s) {
  if (s == "grid") return SpatialScheme::Grid;
  if (s == "semantic") return SpatialScheme::Semantic;
  return std::nullopt;
}

std::optional<TextualScheme> parse_textual_scheme(std::string_view s) {
  if (s == "replication") return TextualScheme::Replication;
  if (s == "majority") return TextualScheme::Majority;
  if (s == "custom") return TextualScheme::Custom;
  return std::nullopt;
}

std::array<int, kDims> CubeSchema::level_counts() const {
  std::array<int, kDims> out{};
  for (int d = 0; d < kDims; ++d) out[d] = static_cast<int>(hierarchies.at(d).levels.size());
  return out;
}

void CubeSchema::check() const {
  if (hierarchies.size() < kDims) throw std::invalid_argument("schema needs four STT hierarchies");
  for (const auto& h : hierarchies) {
    if (h.levels.size() < 2) throw std::invalid_argument("hierarchy " + h.name + " has < 2 levels");
    if (h.levels.back() != "all") throw std::invalid_argument("hierarchy " + h.name + " lacks all");
    if (h.steps.size() + 1 != h.levels.size()) {
      throw std::invalid_argument("hierarchy " + h.name + " has mismatched steps");
    }
  }
  const auto& text = hierarchies[kTextDim];
  if (textual == TextualScheme::Replication) {
    if (text.levels.front() != "term" || text.steps.front() != Cardinality::ManyToMany) {
      throw std::invalid_argument("replication text hierarchy must start with an n-n term step");
    }
  } else if (text.levels.front() != "theme" || text.fact_link != Cardinality::ManyToOne) {
    throw std::invalid_argument("single-parent text hierarchy must link facts n-1 to themes");
  }
}

namespace {

HierarchySchema chain(std::string name, DimensionKind kind, std::vector<std::string> levels) {
  HierarchySchema h{std::move(name), kind, std::move(levels), {}, Cardinality::ManyToOne};
  h.steps.assign(h.levels.size() - 1, Cardinality::ManyToOne);
  return h;
}

}  // namespace

CubeSchema make_schema(SpatialScheme spatial, TextualScheme textual, int grid_levels) {
  if (grid_levels < 1) throw std::invalid_argument("grid needs at least one level");
  CubeSchema s;
  s.spatial = spatial;
  s.textual = textual;
  s.hierarchies.push_back(
      chain("date", DimensionKind::Time, {"day", "month", "quarter", "year", "all"}));
  if (spatial == SpatialScheme::Semantic) {
    s.hierarchies.push_back(chain("semantic", DimensionKind::Location,
                                  {"location", "city", "region", "country", "all"}));
  } else {
    std::vector<std::string> levels;
    for (int l = 0; l < grid_levels; ++l) levels.push_back("cell" + std::to_string(l));
    levels.push_back("all");
    s.hierarchies.push_back(chain("grid", DimensionKind::Location, std::move(levels)));
  }
  if (textual == TextualScheme::Replication) {
    auto h = chain("text", DimensionKind::Text, {"term", "theme", "topic", "concept", "all"});
    h.steps[0] = Cardinality::ManyToMany;
    h.fact_link = Cardinality::ManyToMany;
    s.hierarchies.push_back(std::move(h));
  } else {
    s.hierarchies.push_back(chain("text", DimensionKind::Text, {"theme", "topic", "concept", "all"}));
  }
  s.hierarchies.push_back(chain("timeofday", DimensionKind::Time, {"second", "minute", "hour", "all"}));
  return s;
}

std::string coord_name(const CubeSchema& schema, const Coord& c) {
  std::string out;
  for (int d = 0; d < kDims; ++d) {
    if (d) out += '.';
    out += schema.hierarchies.at(d).levels.at(c[d]);
  }
  return out;
}

std::optional<Coord> parse_coord(const CubeSchema& schema, std::string_view name) {
  Coord c{};
  for (int d = 0; d < kDims; ++d) {
    const auto dot = name.find('.');
    const std::string_view part = d + 1 < kDims ? name.substr(0, dot) : name;
    if (d + 1 < kDims && dot == std::string_view::npos) return std::nullopt;
    const auto& levels = schema.hierarchies.at(d).levels;
    bool found = false;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (levels[l] == part) {
        c[d] = static_cast<std::uint8_t>(l);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
    if (d + 1 < kDims) name.remove_prefix(dot + 1);
  }
  return c;
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::FactCount: return "fact-count";
    case Measure::KeywordFrequency: return "frequency";
    case Measure::Density: return "density";
    case Measure::Volatility: return "volatility";
    case Measure::TopKDense: return "topk-dense";
    case Measure::TopKVolatile: return "topk-volatile";
    case Measure::TopKFrequent: return "topk-frequent";
  }
  return "?";
}

std::optional<Measure> parse_measure(std::string_view s) {
  for (Measure m : {Measure::FactCount, Measure::KeywordFrequency, Measure::Density,
                    Measure::Volatility, Measure::TopKDense, Measure::TopKVolatile,
                    Measure::TopKFrequent}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

bool is_topk(Measure m) noexcept {
  return m == Measure::TopKDense || m == Measure::TopKVolatile || m == Measure::TopKFrequent;
}

}  // namespace sttcube
