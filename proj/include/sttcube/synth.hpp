#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sttcube/cube.hpp"
#include "sttcube/model.hpp"
#include "sttcube/time.hpp"

namespace sttcube {

/// Shape of a generated dataset. Terms follow a Zipf law, places and
/// timestamps are uniform.
struct SynthConfig {
  std::size_t objects = 100000;
  std::uint64_t seed = 7;
  int regions = 3;
  int cities = 6;
  int venues_per_city = 200;
  double venue_radius_km = 5.0;
  std::size_t vocabulary = 400;
  double zipf_exponent = 1.1;
  double local_share = 0.5;  // draws from the city's own term order
  int min_terms = 3;
  int max_terms = 8;
  double hashtag_share = 0.15;
  double unknown_share = 0.01;  // objects far from every city
  int days = 28;
  CivilDate start{2019, 10, 1};
  int themes = 70;
  int topics = 18;
  int concepts = 6;

  void check() const;
};

struct SynthDataset {
  std::vector<SttObject> objects;
  std::vector<GeoMember> geo;
  std::vector<std::tuple<std::string, std::string, int>> text_links;  // child, parent, parent level
  std::vector<std::pair<std::string, double>> scores;

  Taxonomies taxonomies() const;
};

SynthDataset synthesize(const SynthConfig& cfg);

/// Records in the ingest JSON-lines format; terms are joined by spaces.
void write_jsonl(std::ostream& out, const std::vector<SttObject>& objects);
void write_geo_tsv(std::ostream& out, const std::vector<GeoMember>& geo);
void write_text_taxonomy_tsv(std::ostream& out,
                             const std::vector<std::tuple<std::string, std::string, int>>& links);
void write_scores_tsv(std::ostream& out, const std::vector<std::pair<std::string, double>>& scores);

}  // namespace sttcube
