#include "sttcube/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "sttcube/hierarchy.hpp"
#include "sttcube/ingest.hpp"

namespace sttcube {

void SynthConfig::check() const {
  if (regions < 1 || cities < regions) throw std::invalid_argument("need at least one city per region");
  if (venues_per_city < 1) throw std::invalid_argument("venues_per_city must be positive");
  if (vocabulary < 1) throw std::invalid_argument("vocabulary must be positive");
  if (!(zipf_exponent > 0.0)) throw std::invalid_argument("zipf exponent must be positive");
  if (min_terms < 1 || max_terms < min_terms) throw std::invalid_argument("bad term count range");
  if (days < 1) throw std::invalid_argument("days must be positive");
  if (themes < 1 || topics < 1 || concepts < 1) throw std::invalid_argument("taxonomy sizes must be positive");
  for (double share : {local_share, hashtag_share, unknown_share}) {
    if (share < 0.0 || share > 1.0) throw std::invalid_argument("shares must lie in [0, 1]");
  }
}

Taxonomies SynthDataset::taxonomies() const {
  Taxonomies t;
  t.geo = std::make_shared<const GeoTaxonomy>(geo);
  auto text = std::make_shared<TextTaxonomy>();
  for (const auto& [child, parent, level] : text_links) text->add(child, parent, level);
  t.text = text;
  auto s = std::make_shared<ImportanceScores>();
  for (const auto& [member, score] : scores) s->set(member, score);
  t.scores = s;
  return t;
}

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprtvz";
constexpr std::string_view kVowels = "aiou";

// Consonant-vowel syllables keep generated words stable under normalization.
std::string word_of(std::size_t i) {
  const std::size_t base = kConsonants.size() * kVowels.size();
  std::string w;
  for (int s = 0; s < 3 || i > 0; ++s) {
    const std::size_t syl = i % base;
    i /= base;
    w += kConsonants[syl / kVowels.size()];
    w += kVowels[syl % kVowels.size()];
  }
  return w;
}

class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cdf_[r] = total;
    }
    for (auto& c : cdf_) c /= total;
  }
  template <class Rng>
  std::size_t operator()(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

GeoPoint offset(GeoPoint p, double north_km, double east_km) {
  constexpr double km_per_deg = 111.195;
  const double lat = p.lat + north_km / km_per_deg;
  const double lon = p.lon + east_km / (km_per_deg * std::cos(p.lat * std::numbers::pi / 180.0));
  return {lat, lon};
}

}  // namespace

SynthDataset synthesize(const SynthConfig& cfg) {
  cfg.check();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthDataset out;

  // Places.
  std::vector<GeoPoint> centers;
  std::vector<double> city_area;
  while (static_cast<int>(centers.size()) < cfg.cities) {
    const GeoPoint p{54.6 + 3.0 * unit(rng), 8.2 + 4.4 * unit(rng)};
    const bool clear = std::all_of(centers.begin(), centers.end(),
                                   [&](GeoPoint q) { return haversine_km(p, q) > 25.0; });
    if (clear || centers.size() > 10000) {
      centers.push_back(p);
      city_area.push_back(50.0 + 550.0 * unit(rng));
    }
  }
  std::vector<double> region_area(static_cast<std::size_t>(cfg.regions), 0.0);
  for (int c = 0; c < cfg.cities; ++c) region_area[c % cfg.regions] += 3.0 * city_area[c];
  double country_area = 0.0;
  for (double a : region_area) country_area += 1.2 * a;
  out.geo.push_back({"country0", "country", "Country 0", "", std::nullopt, country_area});
  for (int r = 0; r < cfg.regions; ++r) {
    out.geo.push_back({"region" + std::to_string(r), "region", "Region " + std::to_string(r), "country0",
                       std::nullopt, region_area[r]});
  }
  for (int c = 0; c < cfg.cities; ++c) {
    out.geo.push_back({"city" + std::to_string(c), "city", "City " + std::to_string(c),
                       "region" + std::to_string(c % cfg.regions), centers[c], city_area[c]});
  }
  std::vector<std::vector<GeoPoint>> venues(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int v = 0; v < cfg.venues_per_city; ++v) {
      const double r = cfg.venue_radius_km * std::sqrt(unit(rng));
      const double a = 2.0 * std::numbers::pi * unit(rng);
      venues[c].push_back(offset(centers[c], r * std::cos(a), r * std::sin(a)));
    }
  }

  // Vocabulary and taxonomy.
  const StopwordList stops = StopwordList::builtin();
  std::vector<std::string> words;
  for (std::size_t i = 0; words.size() < cfg.vocabulary; ++i) {
    std::string w = word_of(i);
    if (!stops.contains(w) && normalize_term(w) == w) words.push_back(std::move(w));
  }
  std::uniform_int_distribution<int> pick_theme(0, cfg.themes - 1), pick_topic(0, cfg.topics - 1),
      pick_concept(0, cfg.concepts - 1);
  for (const auto& w : words) {
    const std::string theme = "theme" + std::to_string(pick_theme(rng));
    out.text_links.emplace_back(w, theme, kTheme);
    out.text_links.emplace_back("#" + w, theme, kTheme);
  }
  for (int t = 0; t < cfg.themes; ++t) {
    out.text_links.emplace_back("theme" + std::to_string(t), "topic" + std::to_string(pick_topic(rng)), kTopic);
    out.scores.emplace_back("theme" + std::to_string(t), unit(rng));
  }
  for (int t = 0; t < cfg.topics; ++t) {
    out.text_links.emplace_back("topic" + std::to_string(t), "concept" + std::to_string(pick_concept(rng)),
                                kConcept);
  }
  std::vector<std::vector<std::size_t>> local_order(centers.size());
  for (auto& order : local_order) {
    order.resize(words.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
  }

  // Objects.
  const Zipf zipf(words.size(), cfg.zipf_exponent);
  std::uniform_int_distribution<int> pick_city(0, cfg.cities - 1), pick_venue(0, cfg.venues_per_city - 1),
      pick_count(cfg.min_terms, cfg.max_terms), pick_day(0, cfg.days - 1);
  std::uniform_int_distribution<std::int64_t> pick_second(0, kSecondsPerDay - 1);
  const std::int64_t day0 = days_from_civil(cfg.start);
  out.objects.reserve(cfg.objects);
  for (std::size_t n = 0; n < cfg.objects; ++n) {
    SttObject obj;
    const int city = pick_city(rng);
    if (unit(rng) < cfg.unknown_share) {
      obj.location = offset({40.0, -30.0}, 20.0 * unit(rng), 20.0 * unit(rng));
    } else {
      obj.location = venues[city][pick_venue(rng)];
    }
    const int count = pick_count(rng);
    for (int t = 0; t < count; ++t) {
      const std::size_t rank = zipf(rng);
      const std::size_t w = unit(rng) < cfg.local_share ? local_order[city][rank] : rank;
      obj.terms.push_back(unit(rng) < cfg.hashtag_share ? "#" + words[w] : words[w]);
    }
    obj.timestamp = Instant{(day0 + pick_day(rng)) * kSecondsPerDay + pick_second(rng)};
    out.objects.push_back(std::move(obj));
  }
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<SttObject>& objects) {
  for (const auto& o : objects) {
    std::string text;
    for (const auto& t : o.terms) {
      if (!text.empty()) text += ' ';
      text += t;
    }
    const nlohmann::json j = {{"lat", o.location.lat},
                              {"lon", o.location.lon},
                              {"text", text},
                              {"ts", format_rfc3339(o.timestamp)}};
    out << j.dump() << '\n';
  }
}

void write_geo_tsv(std::ostream& out, const std::vector<GeoMember>& geo) {
  out << "member_id\tlevel\tname\tparent_id\tlat\tlon\tarea_km2\n";
  out.precision(17);
  for (const auto& m : geo) {
    out << m.id << '\t' << m.level << '\t' << m.name << '\t' << m.parent << '\t';
    if (m.rep) {
      out << m.rep->lat << '\t' << m.rep->lon;
    } else {
      out << '\t';
    }
    out << '\t' << m.area_km2 << '\n';
  }
}

void write_text_taxonomy_tsv(std::ostream& out,
                             const std::vector<std::tuple<std::string, std::string, int>>& links) {
  static constexpr const char* kLevelNames[] = {"term", "theme", "topic", "concept"};
  for (const auto& [child, parent, level] : links) {
    out << child << '\t' << parent << '\t' << kLevelNames[level] << '\n';
  }
}

void write_scores_tsv(std::ostream& out, const std::vector<std::pair<std::string, double>>& scores) {
  out.precision(17);
  for (const auto& [member, score] : scores) out << member << '\t' << score << '\n';
}

}  // namespace sttcube
