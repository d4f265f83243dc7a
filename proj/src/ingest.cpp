#include "sttcube/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sttcube {

namespace {

constexpr std::string_view kStopwords[] = {
    "a",      "about",   "above",  "after",  "again",  "against", "all",    "am",     "an",
    "and",    "any",     "are",    "as",     "at",     "be",      "because", "been",  "before",
    "being",  "below",   "between", "both",  "but",    "by",      "can",    "could",  "did",
    "do",     "does",    "doing",  "down",   "during", "each",    "few",    "for",    "from",
    "further", "had",    "has",    "have",   "having", "he",      "her",    "here",   "hers",
    "herself", "him",    "himself", "his",   "how",    "i",       "if",     "in",     "into",
    "is",     "it",      "its",    "itself", "just",   "me",      "more",   "most",   "my",
    "myself", "no",      "nor",    "not",    "now",    "of",      "off",    "on",     "once",
    "only",   "or",      "other",  "our",    "ours",   "ourselves", "out",  "over",   "own",
    "same",   "she",     "should", "so",     "some",   "such",    "than",   "that",   "the",
    "their",  "theirs",  "them",   "themselves", "then", "there", "these",  "they",   "this",
    "those",  "through", "to",     "too",    "under",  "until",   "up",     "very",   "was",
    "we",     "were",    "what",   "when",   "where",  "which",   "while",  "who",    "whom",
    "why",    "will",    "with",   "you",    "your",   "yours",   "yourself", "yourselves", "rt"};

// Irregular forms the suffix rules would mangle.
const std::unordered_map<std::string_view, std::string_view>& exceptions() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"children", "child"}, {"men", "man"},         {"women", "woman"},
      {"mice", "mouse"},     {"feet", "foot"},       {"teeth", "tooth"},
      {"geese", "goose"},    {"people", "people"},   {"news", "news"},
      {"series", "series"},  {"species", "species"}, {"always", "always"},
      {"perhaps", "perhaps"}, {"thing", "thing"},    {"nothing", "nothing"},
      {"something", "something"}, {"everything", "everything"}, {"anything", "anything"},
      {"morning", "morning"}, {"evening", "evening"}, {"wedding", "wedding"},
      {"ceiling", "ceiling"}, {"during", "during"},   {"spring", "spring"},
      {"string", "string"},  {"king", "king"},       {"ring", "ring"},
      {"wing", "wing"},      {"bed", "bed"},         {"hundred", "hundred"},
      {"sacred", "sacred"},  {"naked", "naked"},     {"wicked", "wicked"},
      {"bus", "bus"},        {"gas", "gas"},         {"yes", "yes"},
      {"thus", "thus"},      {"lens", "lens"},       {"christmas", "christmas"},
  };
  return table;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool has_vowel(std::string_view w) { return std::any_of(w.begin(), w.end(), is_vowel); }

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

bool has_letter(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return (c >= 'a' && c <= 'z') || c >= 0x80;
  });
}

std::optional<std::string> apply_one_rule(const std::string& w) {
  if (auto it = exceptions().find(w); it != exceptions().end()) {
    if (it->second == w) return std::nullopt;
    return std::string(it->second);
  }
  if (w.size() <= 3) return std::nullopt;
  if (ends_with(w, "ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "es")) {
    const std::string_view stem = std::string_view(w).substr(0, w.size() - 2);
    if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
        ends_with(stem, "ch") || ends_with(stem, "sh")) {
      return std::string(stem);
    }
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, w.size() - 1);
  }
  auto strip = [&](std::size_t n) -> std::optional<std::string> {
    std::string stem = w.substr(0, w.size() - n);
    if (stem.size() < 3 || !has_vowel(stem)) return std::nullopt;
    const std::size_t s = stem.size();
    if (s >= 2 && stem[s - 1] == stem[s - 2] && !is_vowel(stem[s - 1]) && stem[s - 1] != 'l' &&
        stem[s - 1] != 's' && stem[s - 1] != 'z') {
      stem.pop_back();
    }
    return stem;
  };
  if (ends_with(w, "ing")) return strip(3);
  if (ends_with(w, "ed") && !ends_with(w, "eed")) return strip(2);
  return std::nullopt;
}

}  // namespace

StopwordList StopwordList::builtin() {
  StopwordList out;
  for (auto w : kStopwords) out.words.emplace(w);
  return out;
}

StopwordList StopwordList::from_stream(std::istream& in, std::string source) {
  StopwordList out;
  out.source = std::move(source);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::transform(line.begin(), line.end(), line.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.words.insert(line);
  }
  return out;
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file " + path.string());
  return from_stream(in, path.string());
}

std::string normalize_term(std::string_view word) {
  std::string w(word);
  if (!w.empty() && w.front() == '#') return w;
  while (auto next = apply_one_rule(w)) w = std::move(*next);
  return w;
}

std::vector<std::string> preprocess_text(std::string_view raw, const StopwordList& stops) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    const auto c = static_cast<unsigned char>(raw[i]);
    const bool hashtag = c == '#' && i + 1 < raw.size() &&
                         is_word_byte(static_cast<unsigned char>(raw[i + 1]));
    if (!hashtag && !is_word_byte(c)) {
      ++i;
      continue;
    }
    std::size_t j = hashtag ? i + 1 : i;
    while (j < raw.size() && is_word_byte(static_cast<unsigned char>(raw[j]))) ++j;
    std::string token(raw.substr(i, j - i));
    i = j;
    for (auto& ch : token) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    if (hashtag) {
      out.push_back(std::move(token));
      continue;
    }
    if (stops.contains(token)) continue;
    std::string norm = normalize_term(token);
    if (!has_letter(norm) || stops.contains(norm)) continue;
    out.push_back(std::move(norm));
  }
  return out;
}

namespace {

ParsedRecord finish(std::size_t line, double lat, double lon, std::string_view text,
                    std::string_view ts, const StopwordList& stops) {
  ParsedRecord r;
  r.line = line;
  auto when = parse_rfc3339(ts);
  if (!when) {
    r.reason = RejectReason::BadTimestamp;
    return r;
  }
  SttObject obj{{lat, lon}, preprocess_text(text, stops), *when};
  const auto v = validate(obj);
  if (!v.accepted) {
    r.reason = v.reason;
    return r;
  }
  r.object = std::move(obj);
  return r;
}

ParsedRecord parse_json_line(std::size_t line, const std::string& text,
                             const StopwordList& stops) {
  ParsedRecord bad{line, std::nullopt, RejectReason::Malformed};
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return bad;
  auto lat = j.find("lat");
  auto lon = j.find("lon");
  auto body = j.find("text");
  auto ts = j.find("ts");
  if (lat == j.end() || lon == j.end() || body == j.end() || ts == j.end()) return bad;
  if (!lat->is_number() || !lon->is_number() || !body->is_string()) return bad;
  if (!ts->is_string()) return {line, std::nullopt, RejectReason::BadTimestamp};
  return finish(line, lat->get<double>(), lon->get<double>(), body->get_ref<const std::string&>(),
                ts->get_ref<const std::string&>(), stops);
}

std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty() || was_quoted) return std::nullopt;
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      if (was_quoted) return std::nullopt;
      cur += c;
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<ParsedRecord> parse_records(std::istream& in, RecordFormat format,
                                        const StopwordList& stops) {
  std::vector<ParsedRecord> out;
  std::string line;
  std::size_t lineno = 0;
  std::array<int, 4> columns{-1, -1, -1, -1};  // lat, lon, text, ts
  std::size_t header_width = 0;
  bool header_seen = format == RecordFormat::Jsonl;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      auto fields = split_csv(line);
      if (!fields) throw std::runtime_error("malformed CSV header");
      header_width = fields->size();
      static constexpr std::array<std::string_view, 4> names = {"lat", "lon", "text", "ts"};
      for (std::size_t i = 0; i < fields->size(); ++i) {
        for (std::size_t n = 0; n < names.size(); ++n) {
          if ((*fields)[i] == names[n]) columns[n] = static_cast<int>(i);
        }
      }
      if (std::find(columns.begin(), columns.end(), -1) != columns.end()) {
        throw std::runtime_error("CSV header must name lat, lon, text and ts");
      }
      header_seen = true;
      continue;
    }
    if (format == RecordFormat::Jsonl) {
      out.push_back(parse_json_line(lineno, line, stops));
      continue;
    }
    auto fields = split_csv(line);
    if (!fields || fields->size() != header_width) {
      out.push_back({lineno, std::nullopt, RejectReason::Malformed});
      continue;
    }
    auto lat = parse_double((*fields)[columns[0]]);
    auto lon = parse_double((*fields)[columns[1]]);
    if (!lat || !lon) {
      out.push_back({lineno, std::nullopt, RejectReason::BadCoordinate});
      continue;
    }
    out.push_back(finish(lineno, *lat, *lon, (*fields)[columns[2]], (*fields)[columns[3]], stops));
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading records");
  return out;
}

void GridConfig::check() const {
  if (!(base_cell_size_km > 0.0)) throw std::invalid_argument("grid cell size must be positive");
  if (coarsening_factor < 2) throw std::invalid_argument("grid coarsening factor must be >= 2");
  if (level_count < 1) throw std::invalid_argument("grid needs at least one level");
  if (!(reference_lat > -90.0 && reference_lat < 90.0)) {
    throw std::invalid_argument("grid reference latitude out of range");
  }
}

double GridConfig::cell_size_km(int level) const {
  return base_cell_size_km * std::pow(static_cast<double>(coarsening_factor), level);
}

double GridConfig::cell_area_km2(int level) const {
  const double s = cell_size_km(level);
  return s * s;
}

std::string GridCell::key() const {
  return "L" + std::to_string(level) + ":" + std::to_string(ix) + ":" + std::to_string(iy);
}

namespace {

constexpr double kEarthRadiusKm = 6371.0088;
constexpr double kPi = 3.14159265358979323846;

double rad(double deg) { return deg * kPi / 180.0; }

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

GridCell grid_cell_of(GeoPoint p, const GridConfig& cfg, int level) {
  const double x = kEarthRadiusKm * rad(p.lon) * std::cos(rad(cfg.reference_lat));
  const double y = kEarthRadiusKm * rad(p.lat);
  // The epsilon keeps points on a cell origin inside that cell despite rounding.
  const auto ix0 = static_cast<std::int64_t>(std::floor(x / cfg.base_cell_size_km + 1e-9));
  const auto iy0 = static_cast<std::int64_t>(std::floor(y / cfg.base_cell_size_km + 1e-9));
  const std::int64_t f = ipow(cfg.coarsening_factor, level);
  return {level, floor_div(ix0, f), floor_div(iy0, f)};
}

GridCell grid_parent(const GridCell& cell, const GridConfig& cfg) {
  return {cell.level + 1, floor_div(cell.ix, cfg.coarsening_factor),
          floor_div(cell.iy, cfg.coarsening_factor)};
}

double haversine_km(GeoPoint a, GeoPoint b) {
  const double dlat = rad(b.lat - a.lat);
  const double dlon = rad(b.lon - a.lon);
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(rad(a.lat)) * std::cos(rad(b.lat)) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double default_geocode_cutoff_km() {
  if (const char* env = std::getenv("STTCUBE_GEOCODE_CUTOFF_KM")) {
    if (auto v = parse_double(env); v && *v > 0.0) return *v;
  }
  return 50.0;
}

GeoTaxonomy::GeoTaxonomy(std::vector<GeoMember> members) : members_(std::move(members)) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& m = members_[i];
    if (m.id.empty() || m.id == kUnknownMember) {
      throw std::runtime_error("geo taxonomy: invalid member id '" + m.id + "'");
    }
    if (!index_.emplace(m.id, i).second) {
      throw std::runtime_error("geo taxonomy: duplicate member " + m.id);
    }
    if (!(m.area_km2 > 0.0)) throw std::runtime_error("geo taxonomy: " + m.id + " needs an area");
    if (m.level == "city") {
      if (!m.rep) throw std::runtime_error("geo taxonomy: city " + m.id + " lacks a point");
      cities_.push_back(i);
      known_city_area_ += m.area_km2;
    } else if (m.level == "region") {
      regions_.push_back(i);
    } else if (m.level == "country") {
      countries_.push_back(i);
    } else {
      throw std::runtime_error("geo taxonomy: unknown level " + m.level);
    }
  }
  auto expect_parent = [&](std::size_t i, std::string_view level) {
    const auto& m = members_[i];
    const GeoMember* p = find(m.parent);
    if (!p || p->level != level) {
      throw std::runtime_error("geo taxonomy: " + m.id + " has dangling parent '" + m.parent + "'");
    }
  };
  for (auto i : cities_) expect_parent(i, "region");
  for (auto i : regions_) expect_parent(i, "country");
  for (auto i : countries_) {
    if (!members_[i].parent.empty()) {
      throw std::runtime_error("geo taxonomy: country " + members_[i].id + " must not have a parent");
    }
  }
  cities_by_lat_ = cities_;
  std::sort(cities_by_lat_.begin(), cities_by_lat_.end(), [&](std::size_t a, std::size_t b) {
    return members_[a].rep->lat < members_[b].rep->lat;
  });
}

GeoTaxonomy GeoTaxonomy::from_stream(std::istream& in) {
  std::vector<GeoMember> members;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#' || line.rfind("member_id", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) f.push_back(cell);
    if (f.size() != 7) {
      throw std::runtime_error("geo taxonomy line " + std::to_string(lineno) + ": expected 7 fields");
    }
    GeoMember m{f[0], f[1], f[2], f[3], std::nullopt, 0.0};
    auto lat = parse_double(f[4]);
    auto lon = parse_double(f[5]);
    if (lat && lon) m.rep = GeoPoint{*lat, *lon};
    auto area = parse_double(f[6]);
    if (!area) throw std::runtime_error("geo taxonomy line " + std::to_string(lineno) + ": bad area");
    m.area_km2 = *area;
    members.push_back(std::move(m));
  }
  return GeoTaxonomy(std::move(members));
}

GeoTaxonomy GeoTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geo taxonomy " + path.string());
  return from_stream(in);
}

const GeoMember* GeoTaxonomy::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &members_[it->second];
}

const std::vector<std::size_t>& GeoTaxonomy::level_members(std::string_view level) const {
  if (level == "city") return cities_;
  if (level == "region") return regions_;
  if (level == "country") return countries_;
  throw std::invalid_argument("unknown geo level");
}

std::string GeoTaxonomy::nearest_city(GeoPoint p, double cutoff_km) const {
  constexpr double kKmPerDegreeLat = kEarthRadiusKm * kPi / 180.0;
  const std::size_t n = cities_by_lat_.size();
  auto lat_of = [&](std::size_t pos) { return members_[cities_by_lat_[pos]].rep->lat; };
  std::size_t hi = static_cast<std::size_t>(
      std::lower_bound(cities_by_lat_.begin(), cities_by_lat_.end(), p.lat,
                       [&](std::size_t i, double v) { return members_[i].rep->lat < v; }) -
      cities_by_lat_.begin());
  std::size_t lo = hi;
  const GeoMember* best = nullptr;
  double best_d = 0.0;
  auto consider = [&](std::size_t pos) {
    const GeoMember& c = members_[cities_by_lat_[pos]];
    const double d = haversine_km(p, *c.rep);
    if (!best || d < best_d || (d == best_d && c.id < best->id)) {
      best = &c;
      best_d = d;
    }
  };
  // Latitude difference bounds the great-circle distance from below.
  auto bound = [&] { return best ? std::min(best_d, cutoff_km) : cutoff_km; };
  while (hi < n || lo > 0) {
    bool progressed = false;
    if (hi < n && (lat_of(hi) - p.lat) * kKmPerDegreeLat <= bound() + 1e-9) {
      consider(hi++);
      progressed = true;
    }
    if (lo > 0 && (p.lat - lat_of(lo - 1)) * kKmPerDegreeLat <= bound() + 1e-9) {
      consider(--lo);
      progressed = true;
    }
    if (!progressed) break;
  }
  if (!best || best_d > cutoff_km) return std::string(kUnknownMember);
  return best->id;
}

std::string reverse_geocode(GeoPoint p, const GeoTaxonomy& geo, double cutoff_km) {
  if (geo.level_members("city").empty()) {
    throw std::runtime_error("reverse geocoding needs a taxonomy with cities");
  }
  return geo.nearest_city(p, cutoff_km);
}

}  // namespace sttcube
